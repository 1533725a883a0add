"""Independent brute-force references for the scan machinery.

Everything here trades speed for transparency: the exhaustive scan walks
all O(N^4) rank rectangles, tails are summed term by term in log space,
and approximation quality is measured by searching the enumerated family
directly.  These are the yardsticks the fast paths are tested against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .blocks import BlockSpec, block_range
from .enumeration import RectangleIndex
from .errors import NoContainedRect, TooLarge
from .model import Dataset
from .statistic import Counts, HypergeomParams, llr, llr_from_arrays, llr_two_sided

__all__ = ["BruteRect", "brute_force_max", "exact_tail", "approx_quality",
           "containment_witness", "BRUTE_FORCE_LIMIT"]

BRUTE_FORCE_LIMIT = 80


@dataclass(frozen=True)
class BruteRect:
    """A rank rectangle: x-rank interval x y-rank interval, both 1-based and global."""

    x_lo_rank: int
    x_hi_rank: int
    y_lo_rank: int
    y_hi_rank: int
    counts: Counts


def brute_force_max(dataset: Dataset, two_sided: bool = False) -> tuple[float, BruteRect]:
    """Exhaustive one-sided maximum over all distinct rank rectangles.

    Ties resolve to the lexicographically smallest
    (x_lo, x_hi, y_lo, y_hi) tuple.  Guarded to N <= 80.
    """
    n = dataset.n_total
    if n > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"brute force limited to N <= {BRUTE_FORCE_LIMIT}, got {n}")
    if n < 2:
        raise ValueError("need at least two points")
    ones_total = dataset.ones_total
    y_rank = np.empty(n, dtype=np.int64)
    y_rank[np.argsort(dataset.ys, kind="stable")] = np.arange(n)
    # count[i, j] = points with x-rank <= i and y-rank <= j (1-based prefix)
    grid_ones = np.zeros((n + 1, n + 1), dtype=np.int64)
    grid_cnt = np.zeros((n + 1, n + 1), dtype=np.int64)
    for xr in range(n):
        grid_cnt[xr + 1, y_rank[xr] + 1] = 1
        grid_ones[xr + 1, y_rank[xr] + 1] = int(dataset.labels[xr])
    grid_cnt = grid_cnt.cumsum(axis=0).cumsum(axis=1)
    grid_ones = grid_ones.cumsum(axis=0).cumsum(axis=1)

    degenerate = ones_total in (0, n)
    valid = np.triu(np.ones((n, n), dtype=bool))
    best_t = -1.0
    best = None
    for x1 in range(1, n + 1):
        for x2 in range(x1, n + 1):
            cnt_rows = grid_cnt[x2] - grid_cnt[x1 - 1]       # (n+1,) prefix in y
            ones_rows = grid_ones[x2] - grid_ones[x1 - 1]
            # windows [y1, y2]: broadcast prefix differences
            cnt = cnt_rows[None, 1:] - cnt_rows[:-1, None]   # [y1-1, y2]
            ones = ones_rows[None, 1:] - ones_rows[:-1, None]
            if degenerate:
                t = np.zeros((n, n))
            else:
                t = llr_from_arrays(cnt, ones, n, ones_total, two_sided=two_sided)
            t = np.where(valid & (cnt > 0) & (cnt < n), t, -np.inf)
            pos = np.argmax(t)   # first occurrence = smallest (y1, y2)
            tmax = float(t.flat[pos])
            if tmax > best_t:
                y1, y2 = pos // n, pos % n
                best_t = tmax
                best = (x1, x2, y1 + 1, y2 + 1,
                        int(cnt[y1, y2]), int(ones[y1, y2]))
    x1, x2, y1, y2, n_in, ones_in = best
    counts = Counts(n_in, ones_in, n, ones_total)
    if degenerate:
        return 0.0, BruteRect(x1, x2, y1, y2, counts)
    stat = llr_two_sided if two_sided else llr
    return stat(counts), BruteRect(x1, x2, y1, y2, counts)


def _log_binom(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def exact_tail(params: HypergeomParams, side: str) -> float:
    """Exact P(X >= x) or P(X <= x) by stable log-space pmf summation."""
    if params.n_total > 2000:
        raise TooLarge("exact tail limited to N <= 2000")
    n_tot, reds, draws, x = params.n_total, params.reds, params.draws, params.x
    lo = max(0, draws + reds - n_tot)
    hi = min(draws, reds)
    if side == "upper":
        ks = range(x, hi + 1)
    elif side == "lower":
        ks = range(lo, x + 1)
    else:
        raise ValueError(f"side must be upper or lower, got {side!r}")
    denom = _log_binom(n_tot, draws)
    logs = [_log_binom(reds, k) + _log_binom(n_tot - reds, draws - k) - denom
            for k in ks]
    peak = max(logs)
    return math.exp(peak) * math.fsum(math.exp(v - peak) for v in logs)


def _rect_block(dataset: Dataset, mass_count: int) -> int:
    """Block level with F_N in (2^-(ell+1), 2^-ell], by integer comparison."""
    n = dataset.n_total
    ell = int(math.floor(math.log2(n / mass_count)))
    # guard against float rounding at the dyadic boundaries
    while mass_count * (2 ** ell) > n:
        ell -= 1
    while mass_count * (2 ** (ell + 1)) <= n:
        ell += 1
    return ell


def _points_in_rect(dataset: Dataset, rect: tuple[float, float, float, float]):
    x0, x1, y0, y1 = rect
    r0 = int(np.searchsorted(dataset.xs, x0, side="left"))
    r1 = int(np.searchsorted(dataset.xs, x1, side="right"))
    ys = dataset.ys[r0:r1]
    inside = (ys >= y0) & (ys <= y1)
    return r0, r1, int(inside.sum())


def approx_quality(dataset: Dataset, index: RectangleIndex,
                   rect: tuple[float, float, float, float]):
    """Best enumerated rectangle contained in ``rect`` and the mass-loss ratio.

    Searches the block matching the rectangle's empirical mass; raises
    NoContainedRect when nothing fits (which would indicate an enumerator
    bug for rectangles within the guaranteed mass range).  Returns
    ((ell, rect_index), lost_ratio) with lost_ratio =
    F_N(rect \\ best) / F_N(rect).
    """
    x0, x1, y0, y1 = rect
    n = dataset.n_total
    _, _, cnt = _points_in_rect(dataset, rect)
    if cnt == 0:
        raise ValueError("query rectangle contains no points")
    if cnt * 8 > n:
        raise ValueError(f"rectangle mass {cnt}/{n} exceeds 1/8")
    ell = _rect_block(dataset, cnt)
    if ell not in index.block_ids:
        raise ValueError(f"rectangle mass {cnt}/{n} falls below all enumerated blocks")
    br = index.block(ell)
    sx_lo, sx_hi = index.strip_x_bounds(br.sid)
    ry_lo, ry_hi = index.rect_y_bounds(br.sid, br.a, br.b)
    contained = ((sx_lo >= x0) & (sx_hi <= x1) & (ry_lo >= y0) & (ry_hi <= y1)
                 & (br.n_in > 0))
    if not contained.any():
        raise NoContainedRect(f"no enumerated rectangle inside {rect} at block {ell}")
    cand = np.nonzero(contained)[0]
    best = cand[np.argmax(br.n_in[cand])]
    lost = (cnt - int(br.n_in[best])) / n
    return (ell, int(best)), lost / (cnt / n)


def containment_witness(dataset: Dataset, rect: tuple[float, float, float, float]):
    """Constructive contained rectangle per the approximation argument.

    Picks the level from the rectangle's x-extent, then the extreme grid
    lines falling inside the rectangle on each axis.  Returns
    (ell, i, j, k, m, n_idx, n_in) or None when an index falls outside the
    loop ranges (callers then fall back to the exhaustive search).
    """
    x0, x1, y0, y1 = rect
    ds = dataset
    n = ds.n_total
    _, _, cnt = _points_in_rect(ds, rect)
    if cnt == 0:
        return None
    ell = _rect_block(ds, cnt)
    if ell not in block_range(n):
        return None
    block = BlockSpec(ell)
    r0 = int(np.searchsorted(ds.xs, x0, side="left"))      # points with x < x0
    r1 = int(np.searchsorted(ds.xs, x1, side="right"))     # points with x <= x1
    width = r1 - r0
    if width <= 0:
        return None
    i = int(math.ceil(math.log2(width / (block.s * n))))
    i = min(max(i, 0), ell)
    u = block.x_step(i, n)
    j = _first_grid_at_or_above(r0, u)
    k = _last_grid_at_or_below(r1, u, n)
    if j is None or k is None or not (0 <= j <= block.j_max(i)):
        return None
    if not (1 <= k - j <= block.k_span):
        return None
    lo = int(min(math.floor(j * u + 0.5), n)) + 1
    hi = int(min(math.floor(k * u + 0.5), n))
    if hi < lo:
        return None
    ys = np.sort(ds.ys[lo - 1:hi])
    size = hi - lo + 1
    t0 = int(np.searchsorted(ys, y0, side="left"))
    t1 = int(np.searchsorted(ys, y1, side="right"))
    v = block.y_step(i, size)
    m = _first_grid_at_or_above(t0, v)
    nn = _last_grid_at_or_below(t1, v, size)
    if m is None or nn is None or not (0 <= m <= block.m_max(i)):
        return None
    if not (m + 1 <= nn <= m + block.n_span):
        return None
    a = int(math.floor(m * v + 0.5)) + 1
    b = min(int(math.floor(nn * v + 0.5)), size)
    if b < a:
        return None
    return (ell, i, j, k, m, nn, b - a + 1)


def _first_grid_at_or_above(target: int, step: float) -> int | None:
    """Smallest t >= 0 with round(t*step) >= target."""
    t = max(0, int(math.ceil((target - 0.5) / step)) - 2)
    for _ in range(8):
        if math.floor(t * step + 0.5) >= target:
            return t
        t += 1
    return None


def _last_grid_at_or_below(target: int, step: float, cap: int) -> int | None:
    """Largest t with min(round(t*step), cap) <= target, scanning down."""
    t = int(math.floor((target + 0.5) / step)) + 2
    for _ in range(8):
        if t >= 0 and min(math.floor(t * step + 0.5), cap) <= target:
            return t
        t -= 1
    return None
