import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from qieobench import qieo
from qieobench.harness import run_trials
from qieobench.objectives import Evaluator, ProblemSpec, evaluate
from qieobench.trial import RunConfig, TerminationReason

DELTA = 0.01 * math.pi
INV_SQRT2 = 0.7071067811865476


def small_spec(bits=10):
    return ProblemSpec.default("rastrigin", 2, bits_per_variable=bits)


def test_init_is_hadamard():
    pop = qieo.init_quantum_population(1, 1)
    assert pop.alphas.tolist() == [[INV_SQRT2]] and pop.betas.tolist() == [[INV_SQRT2]]
    pop = qieo.init_quantum_population(7, 33)
    np.testing.assert_allclose(pop.alphas**2, 0.5, rtol=0, atol=1e-15)
    assert pop.alphas.shape == (7, 33) and len(pop) == 7 and pop.n_qubits == 33


@pytest.mark.parametrize("n, m", [(0, 3), (3, 0)])
def test_init_rejects_zero_sizes(n, m):
    with pytest.raises(ValueError):
        qieo.init_quantum_population(n, m)


def test_fresh_measurement_is_fair(rng):
    bits = qieo.measure(qieo.init_quantum_population(100, 1000), rng)
    assert bits.size == 10**5
    assert 0.49 <= bits.mean() <= 0.51


def test_measurement_of_basis_states(rng):
    zero = qieo.QuantumPopulation(np.ones((50, 20)), np.zeros((50, 20)))
    one = qieo.QuantumPopulation(np.zeros((50, 20)), np.ones((50, 20)))
    assert not qieo.measure(zero, rng).any()
    assert qieo.measure(one, rng).all()


def test_measurement_biased_qubit(rng):
    a = np.full((100, 1000), 0.5)  # alpha**2 = 0.25
    pop = qieo.QuantumPopulation(a, np.sqrt(1 - a**2))
    assert 0.74 <= qieo.measure(pop, rng).mean() <= 0.76


def test_theta_table():
    d = 0.3
    for m, b, want in [(0, 0, 0.0), (0, 1, d), (1, 0, -d), (1, 1, 0.0)]:
        assert qieo.compute_thetas([[m]], np.array([b]), d)[0, 0] == want


def test_theta_rows_zero_where_measured_equals_best(rng):
    best = rng.integers(0, 2, 40).astype(np.uint8)
    meas = rng.integers(0, 2, (8, 40)).astype(np.uint8)
    meas[3] = best
    th = qieo.compute_thetas(meas, best, DELTA)
    assert not th[3].any()
    assert np.all(th[meas == best[None, :]] == 0)
    assert set(np.abs(th).ravel()) <= {0.0, DELTA}


def test_theta_length_mismatch():
    with pytest.raises(ValueError):
        qieo.compute_thetas(np.zeros((2, 5)), np.zeros(4), DELTA)


def test_rotate_identity_and_quarter_turn():
    pop = qieo.init_quantum_population(3, 4)
    same = qieo.rotate(pop, np.zeros((3, 4)))
    np.testing.assert_array_equal(same.alphas, pop.alphas)
    np.testing.assert_array_equal(same.betas, pop.betas)
    q = qieo.rotate(qieo.QuantumPopulation(np.ones((1, 1)), np.zeros((1, 1))), [[math.pi / 2]])
    assert q.alphas[0, 0] == pytest.approx(0.0, abs=1e-15)
    assert q.betas[0, 0] == pytest.approx(1.0, abs=1e-15)


def test_rotate_shape_mismatch():
    with pytest.raises(ValueError):
        qieo.rotate(qieo.init_quantum_population(2, 3), np.zeros((3, 2)))


def test_repeated_rotation_matches_closed_form():
    pop = qieo.init_quantum_population(1, 1)
    theta = np.full((1, 1), DELTA)
    prev = pop.alphas[0, 0]
    for k in range(1, 10_001):
        pop = qieo.rotate(pop, theta)
        if k <= 25:  # pi/4 + k*delta stays below pi/2
            assert pop.alphas[0, 0] < prev
            prev = pop.alphas[0, 0]
        if k in (25, 1000, 10_000):
            assert pop.alphas[0, 0] == pytest.approx(math.cos(math.pi / 4 + k * DELTA), abs=1e-9)
            assert pop.betas[0, 0] == pytest.approx(math.sin(math.pi / 4 + k * DELTA), abs=1e-9)
    assert pop.norm_error() < 1e-12


def test_normalization_under_random_rotations():
    r = np.random.default_rng(0)
    pop = qieo.init_quantum_population(5, 16)
    for _ in range(10_000):
        pop = qieo.rotate(pop, r.uniform(-math.pi, math.pi, (5, 16)))
    assert pop.norm_error() < 1e-9


@given(st.integers(0, 2**32 - 1))
def test_fast_update_matches_reference_rotation(seed):
    r = np.random.default_rng(seed)
    ref = qieo.init_quantum_population(6, 24)
    state = qieo._AmplitudeState(ref, DELTA)
    for _ in range(30):
        meas = state.measure(r)
        best = r.integers(0, 2, 24).astype(np.uint8)
        ref = qieo.rotate(ref, qieo.compute_thetas(meas, best, DELTA))
        state.rotate_towards(meas, best)
    np.testing.assert_array_equal(state.alphas, ref.alphas)
    np.testing.assert_array_equal(state.betas, ref.betas)
    np.testing.assert_array_equal(state.prob_zero, ref.alphas**2)


@given(
    st.lists(st.floats(0.01, math.pi / 2 - 0.01), min_size=1, max_size=12),
    st.integers(0, 2**32 - 1),
)
def test_rotation_attracts_towards_best(angles, seed):
    r = np.random.default_rng(seed)
    phi = np.array(angles)
    m = phi.size
    best = r.integers(0, 2, m).astype(np.uint8)
    # Keep one step inside the first quadrant so nothing overshoots.
    phi = np.where(best == 1, np.minimum(phi, math.pi / 2 - DELTA), np.maximum(phi, DELTA))
    pop = qieo.QuantumPopulation(np.cos(phi)[None, :], np.sin(phi)[None, :])
    meas = best.copy()[None, :]
    flip = r.random(m) < 0.5
    flip[r.integers(m)] = True
    meas[0, flip] ^= 1

    def p_best(p):
        return np.prod(np.where(best == 1, p.betas[0] ** 2, p.alphas[0] ** 2))

    after = qieo.rotate(pop, qieo.compute_thetas(meas, best, DELTA))
    assert p_best(after) > p_best(pop)


def test_zero_delta_leaves_amplitudes_and_is_uniform():
    spec = ProblemSpec.default("ackley", 5, bits_per_variable=20)  # 100 qubits
    opt = qieo.QIEO(spec, RunConfig(population_size=100, delta_theta=0.0), np.random.default_rng(5))
    start = opt.population
    samples = [opt.measured]
    for _ in range(9):
        opt.step()
        samples.append(opt.measured)
    np.testing.assert_array_equal(opt.population.alphas, start.alphas)
    bits = np.concatenate(samples).reshape(-1, 4)  # 10**5 bits as 4-bit words
    words = bits @ np.array([8, 4, 2, 1])
    counts = np.bincount(words, minlength=16)
    assert stats.chisquare(counts).pvalue > 0.001


def test_best_record_is_global_and_consistent():
    spec = small_spec()
    opt = qieo.QIEO(spec, RunConfig(population_size=20), np.random.default_rng(3))
    history = [opt.best.fitness]
    for _ in range(60):
        opt.step()
        b = opt.best
        history.append(b.fitness)
        assert b.fitness == pytest.approx(evaluate(spec, b.bits), abs=0)
        assert b.fitness <= opt.fitness.min()
        assert 0 <= b.found_at_generation <= opt.generation
    assert np.all(np.diff(history) <= 0)


def test_run_counts_evaluations_from_generation_zero():
    spec = small_spec()
    cfg = RunConfig(population_size=30, max_generations=25, stagnation_window=1000)
    res = qieo.run_qieo(spec, cfg, seed=11)
    assert res.termination_reason in (TerminationReason.MAX_GENERATIONS, TerminationReason.TARGET_REACHED)
    assert res.evaluations == 30 * (res.generations_run + 1)
    assert res.evaluations_excl_init == 30 * res.generations_run

    # Instrumented replay: drive the stepper by hand and count calls.
    opt = qieo.QIEO(spec, cfg, np.random.default_rng(11))
    for _ in range(res.generations_run):
        opt.step()
    assert opt.evaluator.count == res.evaluations
    assert opt.best.fitness == res.best_fitness


def test_run_is_deterministic():
    spec = small_spec()
    cfg = RunConfig(population_size=16, max_generations=80, record_curve=True)
    a, b = qieo.run_qieo(spec, cfg, 99), qieo.run_qieo(spec, cfg, 99)
    assert a.same_outcome(b)
    assert np.all(np.diff(a.curve[:, 1]) <= 0)
    assert a.curve.shape == (a.generations_run + 1, 3)


def test_evaluator_agrees_with_run_count():
    spec = small_spec()
    ev = Evaluator(spec)
    ev(np.zeros((5, spec.layout.total_bits), np.uint8))
    assert ev.count == 5


def test_rastrigin_2d_population_100_reaches_tolerance():
    spec = ProblemSpec.default("rastrigin", 2)
    results = run_trials("qieo", spec, RunConfig(population_size=100), 30, base_seed=2024, workers=1)
    assert sum(r.success for r in results) >= 27
