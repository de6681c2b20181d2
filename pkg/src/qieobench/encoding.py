"""Binary genome shared by QIEO and the GA.

A genome is a numpy ``uint8`` array of 0/1 values. Each design variable
occupies ``bits_per_variable`` consecutive positions, most significant bit
first, and is decoded as a plain unsigned integer mapped linearly onto the
variable's bound interval. Batches of genomes are 2-D arrays with one
genome per row.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

#: Bits per design variable used by the benchmark presets.
DEFAULT_BITS_PER_VARIABLE = 20
MAX_BITS_PER_VARIABLE = 32


@dataclass(frozen=True)
class GenomeLayout:
    """Placement of ``dimension`` fixed-width variables inside a bit string."""

    dimension: int
    lower_bounds: tuple[float, ...]
    upper_bounds: tuple[float, ...]
    bits_per_variable: int = DEFAULT_BITS_PER_VARIABLE

    def __post_init__(self):
        object.__setattr__(self, "lower_bounds", tuple(float(v) for v in self.lower_bounds))
        object.__setattr__(self, "upper_bounds", tuple(float(v) for v in self.upper_bounds))
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dimension!r}")
        if not 1 <= self.bits_per_variable <= MAX_BITS_PER_VARIABLE:
            raise ValueError(
                f"bits_per_variable must be in [1, {MAX_BITS_PER_VARIABLE}], "
                f"got {self.bits_per_variable!r}"
            )
        if len(self.lower_bounds) != self.dimension or len(self.upper_bounds) != self.dimension:
            raise ValueError("bounds must have one entry per design variable")
        lo = np.asarray(self.lower_bounds)
        hi = np.asarray(self.upper_bounds)
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("bounds must be finite")
        if np.any(lo >= hi):
            raise ValueError("every lower bound must be strictly below its upper bound")

    @classmethod
    def uniform(
        cls,
        dimension: int,
        lower: float,
        upper: float,
        bits_per_variable: int = DEFAULT_BITS_PER_VARIABLE,
    ) -> "GenomeLayout":
        """Layout whose variables all share the box ``[lower, upper]``."""
        return cls(dimension, (lower,) * dimension, (upper,) * dimension, bits_per_variable)

    @property
    def total_bits(self) -> int:
        return self.dimension * self.bits_per_variable

    @property
    def max_code(self) -> int:
        return (1 << self.bits_per_variable) - 1

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "bits_per_variable": self.bits_per_variable,
            "lower_bounds": list(self.lower_bounds),
            "upper_bounds": list(self.upper_bounds),
        }


def _as_bits(bits, layout: GenomeLayout) -> np.ndarray:
    arr = np.asarray(bits)
    if arr.ndim not in (1, 2) or arr.shape[-1] != layout.total_bits:
        raise ValueError(
            f"expected genomes of length {layout.total_bits}, got array of shape {arr.shape}"
        )
    return arr


def _codes(bits, layout: GenomeLayout) -> np.ndarray:
    # Float matmul is exact here: codes stay below 2**32 < 2**53.
    arr = _as_bits(bits, layout)
    b = layout.bits_per_variable
    weights = 2.0 ** np.arange(b - 1, -1, -1)
    grouped = arr.reshape(arr.shape[:-1] + (layout.dimension, b)).astype(np.float64)
    return grouped @ weights


def decode_codes(bits, layout: GenomeLayout) -> np.ndarray:
    """Unsigned integer code of every variable, big-endian within a variable."""
    return _codes(bits, layout).astype(np.uint64)


def decode(bits, layout: GenomeLayout) -> np.ndarray:
    """Map genome(s) to real points inside the layout's bound box.

    Parameters
    ----------
    bits : array_like of {0, 1}
        One genome of length ``layout.total_bits`` or a ``(n, total_bits)``
        batch.
    layout : GenomeLayout

    Returns
    -------
    numpy.ndarray
        Shape ``(dimension,)`` or ``(n, dimension)``.
    """
    codes = _codes(bits, layout)
    lo = np.asarray(layout.lower_bounds)
    span = np.asarray(layout.upper_bounds) - lo
    return lo + (codes / layout.max_code) * span


def encode(x: Sequence[float], layout: GenomeLayout) -> np.ndarray:
    """Genome whose decoded point is the grid point nearest to ``x``.

    Only used to build test fixtures and seeded starting points.
    """
    x = np.asarray(x, dtype=np.float64)
    lo = np.asarray(layout.lower_bounds)
    hi = np.asarray(layout.upper_bounds)
    if x.shape != lo.shape:
        raise ValueError(f"expected a point of dimension {layout.dimension}")
    frac = np.clip((x - lo) / (hi - lo), 0.0, 1.0)
    codes = np.rint(frac * layout.max_code).astype(np.uint64)
    b = layout.bits_per_variable
    shifts = np.arange(b - 1, -1, -1, dtype=np.uint64)
    bits = (codes[:, None] >> shifts[None, :]) & np.uint64(1)
    return bits.astype(np.uint8).reshape(-1)


def random_bitstring(layout: GenomeLayout, rng: np.random.Generator, n: int | None = None) -> np.ndarray:
    """Independent fair coin flips: one genome, or ``n`` genomes as rows."""
    shape = (layout.total_bits,) if n is None else (n, layout.total_bits)
    return (rng.random(shape) < 0.5).astype(np.uint8)
