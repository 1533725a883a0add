"""Log-likelihood ratio statistic, hypergeometric tail bounds, detection boundary.

The local statistic for a window holding ``n_in`` of ``n_total`` points and
``ones_in`` of ``ones_total`` labels is the Bernoulli log-likelihood ratio

    T = n*(p_hat*log(p_hat/p_bar) + (1-p_hat)*log((1-p_hat)/(1-p_bar)))
      + (N-n)*(q_hat*log(q_hat/p_bar) + (1-q_hat)*log((1-q_hat)/(1-p_bar)))

with p_hat the inside proportion of 1s, q_hat the outside proportion,
p_bar the overall proportion, and the convention 0*log(0) = 0.  One-sided
use zeroes T whenever q_hat > p_hat.  The same functional, applied to a
hypergeometric count, yields an exponential tail bound with an explicit
constant; both live here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLabels, InvalidAlternative, InvalidSide

__all__ = [
    "Counts", "HypergeomParams", "llr", "llr_two_sided", "l_function",
    "tail_bound", "tail_bound_constant", "detection_boundary",
    "llr_from_arrays",
]


@dataclass(frozen=True)
class Counts:
    """Window counts: points and 1-labels inside, against the totals."""

    n_in: int
    ones_in: int
    n_total: int
    ones_total: int

    def __post_init__(self):
        if not (0 <= self.ones_in <= self.n_in <= self.n_total):
            raise ValueError(f"invalid counts {self}")
        if self.ones_in > self.ones_total:
            raise ValueError("ones_in exceeds ones_total")
        if self.ones_total - self.ones_in > self.n_total - self.n_in:
            raise ValueError("zeros outside window exceed available points")


@dataclass(frozen=True)
class HypergeomParams:
    """Drawing ``draws`` of ``n_total`` items, ``reds`` of them red; ``x`` reds seen."""

    n_total: int
    reds: int
    draws: int
    x: int

    def __post_init__(self):
        if not (0 < self.draws < self.n_total and 0 < self.reds < self.n_total):
            raise ValueError(f"invalid population {self}")
        lo = max(0, self.draws + self.reds - self.n_total)
        hi = min(self.draws, self.reds)
        if not (lo <= self.x <= hi):
            raise ValueError(f"x={self.x} outside support [{lo}, {hi}]")

    @property
    def mean(self) -> float:
        return self.draws * self.reds / self.n_total


def _half(count: int, total: int, p: float) -> float:
    """count * log((count/total) / p) with the 0*log(0) = 0 convention."""
    if count == 0:
        return 0.0
    return count * math.log(count / (total * p))


def _llr_value(n_in: int, ones_in: int, n_total: int, ones_total: int) -> float:
    """Two-sided LLR via the exact integer counts; caller handles zeroing."""
    pbar = ones_total / n_total
    n_out = n_total - n_in
    ones_out = ones_total - ones_in
    t = _half(ones_in, n_in, pbar) + _half(n_in - ones_in, n_in, 1.0 - pbar)
    t += _half(ones_out, n_out, pbar) + _half(n_out - ones_out, n_out, 1.0 - pbar)
    return t


def llr(counts: Counts) -> float:
    """One-sided statistic: 0 unless the inside proportion exceeds the outside."""
    _check_nondegenerate(counts)
    # q_hat <= p_hat  <=>  (ones_total - ones_in) * n_in <= ones_in * (n_total - n_in),
    # compared in exact integer arithmetic; equality means T = 0 exactly.
    lhs = counts.ones_in * (counts.n_total - counts.n_in)
    rhs = (counts.ones_total - counts.ones_in) * counts.n_in
    if lhs <= rhs:
        return 0.0
    return _llr_value(counts.n_in, counts.ones_in, counts.n_total, counts.ones_total)


def llr_two_sided(counts: Counts) -> float:
    """Same expression without the one-sided zeroing; 0 exactly when p_hat == q_hat."""
    _check_nondegenerate(counts)
    lhs = counts.ones_in * (counts.n_total - counts.n_in)
    rhs = (counts.ones_total - counts.ones_in) * counts.n_in
    if lhs == rhs:
        return 0.0
    return _llr_value(counts.n_in, counts.ones_in, counts.n_total, counts.ones_total)


def _check_nondegenerate(counts: Counts) -> None:
    if counts.ones_total in (0, counts.n_total):
        raise DegenerateLabels(
            f"all labels equal ({counts.ones_total} ones of {counts.n_total})")
    if not (0 < counts.n_in < counts.n_total):
        raise ValueError("window must contain some but not all points")


def llr_from_arrays(n_in, ones_in, n_total: int, ones_total: int,
                    two_sided: bool = False) -> np.ndarray:
    """Vectorized statistic over arrays of window counts.

    Empty windows (n_in == 0) and all-point windows get 0.  Uses the same
    exact integer zeroing rule as the scalar form.
    """
    n = np.asarray(n_in, dtype=np.int64)
    o = np.asarray(ones_in, dtype=np.int64)
    pbar = ones_total / n_total
    n_out = n_total - n
    o_out = ones_total - o

    def half(c, tot, p):
        with np.errstate(divide="ignore", invalid="ignore"):
            v = c * np.log(c / (tot * p))
        return np.where(c > 0, v, 0.0)

    t = (half(o, n, pbar) + half(n - o, n, 1.0 - pbar)
         + half(o_out, n_out, pbar) + half(n_out - o_out, n_out, 1.0 - pbar))
    lhs = o * n_out
    rhs = o_out * n
    keep = (lhs != rhs) if two_sided else (lhs > rhs)
    return np.where(keep, t, 0.0)


def l_function(params: HypergeomParams) -> float:
    """The LLR functional L(x) of a hypergeometric count; L(mean) = 0."""
    return _llr_value(params.draws, params.x, params.n_total, params.reds)


def tail_bound_constant(params: HypergeomParams) -> float:
    """The multiplicative constant C = 2*exp(13/(12*pbar*(1-pbar)) * (1/n + 1/(N-n)))."""
    pbar = params.reds / params.n_total
    n = params.draws
    big_n = params.n_total
    return 2.0 * math.exp(13.0 / (12.0 * pbar * (1.0 - pbar)) * (1.0 / n + 1.0 / (big_n - n)))


def tail_bound(params: HypergeomParams, side: str, threshold: float | None = None) -> float:
    """Exponential tail bound C*(L+2)*exp(-L); may exceed 1 and still be valid.

    side="upper" bounds P(X >= x) and requires x > mean; side="lower" bounds
    P(X <= x) and requires x < mean; side="two_sided_L" bounds
    P(L(X) >= t) by 2*C*(t+2)*exp(-t) for the given positive ``threshold``
    (params.x is ignored there).
    """
    c = tail_bound_constant(params)
    if side == "two_sided_L":
        if threshold is None or threshold <= 0:
            raise InvalidSide("two_sided_L needs a positive threshold")
        return 2.0 * c * (threshold + 2.0) * math.exp(-threshold)
    m = params.mean
    if side == "upper":
        if not params.x > m:
            raise InvalidSide(f"upper tail needs x > mean ({params.x} <= {m})")
    elif side == "lower":
        if not params.x < m:
            raise InvalidSide(f"lower tail needs x < mean ({params.x} >= {m})")
    else:
        raise InvalidSide(f"unknown side {side!r}")
    lx = l_function(params)
    return c * (lx + 2.0) * math.exp(-lx)


def detection_boundary(f_r: float, p: float, q: float) -> float:
    """D = F(R)*(1-F(R))*(p-q)^2 / (p*(1-q)), the quantity governing detectability."""
    if not 0.0 < f_r < 1.0:
        raise ValueError(f"f_r must be in (0,1), got {f_r}")
    if not (0.0 < p <= 1.0 and 0.0 <= q < 1.0):
        raise ValueError(f"need p in (0,1], q in [0,1), got p={p}, q={q}")
    if q >= p:
        raise InvalidAlternative(f"alternative requires q < p, got q={q} >= p={p}")
    return f_r * (1.0 - f_r) * (p - q) ** 2 / (p * (1.0 - q))
