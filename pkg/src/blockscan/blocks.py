"""Block definitions and the shared rank-grid arithmetic.

A block at level ell collects approximating rectangles whose target measure
is about 2^-ell.  Within a block, level i = 0..ell trades x-resolution
against y-resolution: x-grid lines sit at ranks round(j * eps*s*2^i * N) and
each extracted x-strip gets a y-grid at ranks round(m * eps*2^-i * N_strip).

Every enumeration path (visitor, materialized index, streaming evaluator)
must derive its ranks from the helpers here so that they agree bit-for-bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["BlockSpec", "block_range", "x_boundaries", "y_grid_a", "y_grid_b"]


def block_range(n_total: int) -> range:
    """Levels ell = 3 .. floor(log2(N / (2 ln N))), possibly empty.

    The log in the denominator is the natural log, consistent with the
    smallest usable window mass of 2 ln(N) / N.
    """
    if n_total < 3:
        return range(3, 3)
    top = math.floor(math.log2(n_total / (2.0 * math.log(n_total))))
    return range(3, top + 1)


@dataclass(frozen=True)
class BlockSpec:
    """Loop bounds for one block level.

    s = 2^-ell is the target measure, eps = ell^(-1/2)/6 the grid resolution.
    """

    ell: int

    def __post_init__(self):
        if self.ell < 3:
            raise ValueError(f"block level must be >= 3, got {self.ell}")

    @classmethod
    def for_dataset(cls, ell: int, n_total: int) -> "BlockSpec":
        rng = block_range(n_total)
        if ell not in rng:
            raise ValueError(f"level {ell} outside block range {rng} for N={n_total}")
        return cls(ell)

    @property
    def s(self) -> float:
        return 2.0 ** (-self.ell)

    @property
    def eps(self) -> float:
        return 1.0 / (6.0 * math.sqrt(self.ell))

    @property
    def k_span(self) -> int:
        """k runs j+1 .. j+k_span."""
        return math.floor(1.0 / self.eps)

    @property
    def n_span(self) -> int:
        """n runs m+1 .. m+n_span."""
        return math.floor(2.0 / self.eps)

    def j_max(self, i: int) -> int:
        return math.floor(1.0 / (self.eps * self.s * 2.0 ** i))

    def m_max(self, i: int) -> int:
        return math.floor(2.0 ** i / self.eps)

    def x_step(self, i: int, n_total: int) -> float:
        """Rank step of the x-grid: eps * s * 2^i * N."""
        return self.eps * self.s * (2.0 ** i) * n_total

    def y_step(self, i: int, n_strip: int) -> float:
        """Rank step of the y-grid inside a strip: eps * 2^-i * N_strip."""
        return self.eps * (2.0 ** (-i)) * n_strip


def _round_half_up_arr(x: np.ndarray) -> np.ndarray:
    return np.floor(x + 0.5).astype(np.int64)


def x_boundaries(block: BlockSpec, i: int, n_total: int) -> np.ndarray:
    """Grid ranks bnd[t] = min(round(t * x_step), N) for t = 0 .. j_max + k_span.

    The strip for (j, k) covers x-ranks bnd[j]+1 .. min(bnd[k], N); it is
    empty (and skipped) when that interval is empty.
    """
    u = block.x_step(i, n_total)
    t = np.arange(block.j_max(i) + block.k_span + 1, dtype=np.float64)
    return np.minimum(_round_half_up_arr(t * u), n_total)


def y_grid_a(block: BlockSpec, i: int, n_strip) -> np.ndarray:
    """Lower y-ranks a(m) = round(m * y_step) + 1 for m = 0 .. m_max.

    Vectorized over strips: ``n_strip`` may be an array, giving a 2D grid
    (strips x m).
    """
    v = block.eps * (2.0 ** (-i)) * np.asarray(n_strip, dtype=np.float64)
    m = np.arange(block.m_max(i) + 1, dtype=np.float64)
    return _round_half_up_arr(np.multiply.outer(v, m)) + 1


def y_grid_b(block: BlockSpec, i: int, n_strip) -> np.ndarray:
    """Upper y-ranks b(n) = min(round(n * y_step), N_strip) for n = 1 .. m_max + n_span."""
    ns = np.asarray(n_strip, dtype=np.float64)
    v = block.eps * (2.0 ** (-i)) * ns
    n = np.arange(1, block.m_max(i) + block.n_span + 1, dtype=np.float64)
    raw = _round_half_up_arr(np.multiply.outer(v, n))
    return np.minimum(raw, np.asarray(n_strip, dtype=np.int64).reshape(ns.shape + (1,)))
