"""Joint permutation null tables and size-dependent critical values.

For each random relabeling, the maximum statistic of every block is
recorded jointly.  The family level alpha_tilde is then the largest value
such that the fraction of permutations in which ANY block exceeds its
(1 - alpha_tilde / w(ell))-quantile stays within alpha; w is the block
weight, ell^2 by default.  Because the empirical quantiles only move when
alpha_tilde / w(ell) crosses a multiple of 1/M, the union rate is a step
function and bisection finishes with a snap to the largest achievable
breakpoint.
"""
from __future__ import annotations

import json
import math
import multiprocessing
from dataclasses import dataclass, field

import numpy as np

from .engine import LANES, GroupedEngine
from .enumeration import RectangleIndex
from .errors import DegenerateLabels, EmptyBlockRange
from .model import Dataset

__all__ = [
    "WEIGHT_SCHEMES", "PermutationTable", "CalibrationResult",
    "simulate_null", "block_quantile", "solve_alpha_tilde",
    "conventional_threshold",
]

WEIGHT_SCHEMES = {
    "ell2": lambda ell: float(ell) ** 2,
    "ell10": lambda ell: (10.0 + ell) ** 2,
}


@dataclass(frozen=True)
class PermutationTable:
    """Joint per-permutation block maxima under the permutation null."""

    n_perms: int
    block_ids: list[int]
    maxima: np.ndarray          # (n_perms, n_blocks)
    seed: int
    include_identity: bool
    two_sided: bool
    sorted_maxima: np.ndarray = field(init=False)   # (n_blocks, n_perms), ascending

    def __post_init__(self):
        if self.maxima.shape != (self.n_perms, len(self.block_ids)):
            raise ValueError("maxima shape mismatch")
        object.__setattr__(self, "sorted_maxima", np.sort(self.maxima.T, axis=1))
        self.maxima.setflags(write=False)
        self.sorted_maxima.setflags(write=False)


def _permutation_for(seed: int, t: int, n: int, include_identity: bool) -> np.ndarray:
    """Permutation substream t; independent of worker scheduling."""
    if include_identity and t == 0:
        return np.arange(n)
    return np.random.default_rng((seed, t)).permutation(n)


_POOL_STATE: dict = {}


def _lane_batch(args):
    b0, b1 = args
    engine: GroupedEngine = _POOL_STATE["engine"]
    labels = _POOL_STATE["labels"]
    seed = _POOL_STATE["seed"]
    include_identity = _POOL_STATE["include_identity"]
    n_perms = _POOL_STATE["n_perms"]
    n = len(labels)
    out = []
    for batch in range(b0, b1):
        ts = list(range(batch * LANES, min((batch + 1) * LANES, n_perms)))
        mat = np.empty((LANES, n), dtype=np.uint8)
        for lane in range(LANES):
            t = ts[lane] if lane < len(ts) else ts[0]
            mat[lane] = labels[_permutation_for(seed, t, n, include_identity)]
        maxima = engine.block_maxima_lanes(mat)    # (n_blocks, LANES)
        out.append((batch, maxima[:, :len(ts)].T.copy()))
    return out


def simulate_null(dataset: Dataset, n_perms: int, seed: int, *,
                  index: RectangleIndex | None = None,
                  two_sided: bool = False,
                  include_identity: bool = False,
                  workers: int = 1) -> PermutationTable:
    """Monte Carlo table of joint block maxima over label permutations.

    Deterministic for fixed (dataset, n_perms, seed) regardless of
    ``workers``: permutation t always uses RNG substream (seed, t).
    """
    if dataset.ones_total in (0, dataset.n_total):
        raise DegenerateLabels("permutation null is degenerate: all labels equal")
    if n_perms < 1:
        raise ValueError("need at least one permutation")
    if index is None:
        index = RectangleIndex(dataset)   # raises EmptyBlockRange when empty
    engine = GroupedEngine(index, two_sided=two_sided)
    labels = dataset.labels.astype(np.uint8)
    n_batches = math.ceil(n_perms / LANES)
    state = {"engine": engine, "labels": labels, "seed": seed,
             "include_identity": include_identity, "n_perms": n_perms}
    results: dict[int, np.ndarray] = {}
    if workers > 1 and n_batches > 1:
        global _POOL_STATE
        _POOL_STATE = state
        try:
            ctx = multiprocessing.get_context("fork")
            spans = _split_spans(n_batches, workers)
            with ctx.Pool(processes=workers) as pool:
                for chunk in pool.map(_lane_batch, spans):
                    for batch, arr in chunk:
                        results[batch] = arr
        finally:
            _POOL_STATE = {}
    else:
        _POOL_STATE.update(state)
        try:
            for batch, arr in _lane_batch((0, n_batches)):
                results[batch] = arr
        finally:
            _POOL_STATE.clear()
    maxima = np.concatenate([results[b] for b in range(n_batches)], axis=0)
    return PermutationTable(n_perms=n_perms, block_ids=list(index.block_ids),
                            maxima=maxima, seed=seed,
                            include_identity=include_identity, two_sided=two_sided)


def _split_spans(n_items: int, workers: int) -> list[tuple[int, int]]:
    per = math.ceil(n_items / workers)
    return [(s, min(s + per, n_items)) for s in range(0, n_items, per)]


def block_quantile(table: PermutationTable, ell: int, level: float) -> float:
    """Empirical (1-level)-quantile of a block's permutation maxima.

    Order statistic at index ceil((1-level)*M), 1-based, clamped to [1, M];
    conservative for mid-grid levels.
    """
    bi = table.block_ids.index(ell)
    m = table.n_perms
    idx = min(max(math.ceil((1.0 - level) * m), 1), m)
    return float(table.sorted_maxima[bi, idx - 1])


@dataclass(frozen=True)
class CalibrationResult:
    """Solved family level and the per-block critical values."""

    alpha: float
    alpha_tilde: float
    weight_scheme: str
    block_ids: list[int]
    levels: dict[int, float]        # ell -> alpha_tilde / w(ell), capped at 1
    thresholds: dict[int, float]    # ell -> q_ell(level)
    union_rate: float
    n_perms: int
    seed: int
    two_sided: bool

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "alpha_tilde": self.alpha_tilde,
            "weight_scheme": self.weight_scheme,
            "thresholds": [
                {"ell": ell, "level": self.levels[ell], "q": self.thresholds[ell]}
                for ell in self.block_ids
            ],
            "union_rate": self.union_rate,
            "n_perms": self.n_perms,
            "seed": self.seed,
            "two_sided": self.two_sided,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _levels_and_thresholds(table: PermutationTable, alpha_tilde: float,
                           weight: "callable") -> tuple[dict, dict, np.ndarray]:
    levels, thresholds = {}, {}
    thr = np.empty(len(table.block_ids))
    for bi, ell in enumerate(table.block_ids):
        level = min(alpha_tilde / weight(ell), 1.0)
        q = block_quantile(table, ell, level)
        levels[ell] = level
        thresholds[ell] = q
        thr[bi] = q
    return levels, thresholds, thr


def _union_rate(table: PermutationTable, thr: np.ndarray) -> float:
    return float((table.maxima > thr[None, :]).any(axis=1).mean())


def solve_alpha_tilde(table: PermutationTable, alpha: float,
                      weight_scheme: str = "ell2") -> CalibrationResult:
    """Largest achievable alpha_tilde with joint union rate <= alpha.

    Bisection on [0, w(3)] down to width 1/(4M), then an exact snap to the
    breakpoint grid {w(ell) * r / M}; the union rate is constant between
    breakpoints, so the snapped value is exactly maximal.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    weight = WEIGHT_SCHEMES[weight_scheme]
    m = table.n_perms

    def feasible(at: float) -> tuple[bool, float, np.ndarray]:
        _, _, thr = _levels_and_thresholds(table, at, weight)
        rate = _union_rate(table, thr)
        return rate <= alpha, rate, thr

    lo = 0.0
    hi = weight(min(table.block_ids))
    ok_lo, _, _ = feasible(lo)
    if not ok_lo:    # cannot happen: at level 0 no maximum exceeds the top order stat
        levels, thresholds, thr = _levels_and_thresholds(table, 0.0, weight)
        return CalibrationResult(alpha=alpha, alpha_tilde=0.0,
                                 weight_scheme=weight_scheme,
                                 block_ids=list(table.block_ids),
                                 levels=levels, thresholds=thresholds,
                                 union_rate=_union_rate(table, thr),
                                 n_perms=m, seed=table.seed,
                                 two_sided=table.two_sided)
    ok_hi, _, _ = feasible(hi)
    if ok_hi:
        lo = hi
    else:
        while hi - lo >= 1.0 / (4.0 * m):
            mid = 0.5 * (lo + hi)
            if feasible(mid)[0]:
                lo = mid
            else:
                hi = mid
    # snap: largest grid point that stays feasible
    grid = np.unique(np.concatenate([
        weight(ell) * np.arange(m + 1) / m for ell in table.block_ids]))
    grid = grid[grid <= weight(min(table.block_ids))]
    i_hi = np.searchsorted(grid, hi, side="right")
    i_lo = np.searchsorted(grid, lo, side="right") - 1
    best = 0.0
    for g in grid[max(i_lo, 0):i_hi][::-1]:
        if feasible(float(g))[0]:
            best = float(g)
            break
    levels, thresholds, thr = _levels_and_thresholds(table, best, weight)
    return CalibrationResult(alpha=alpha, alpha_tilde=best,
                             weight_scheme=weight_scheme,
                             block_ids=list(table.block_ids),
                             levels=levels, thresholds=thresholds,
                             union_rate=_union_rate(table, thr),
                             n_perms=m, seed=table.seed,
                             two_sided=table.two_sided)


def conventional_threshold(table: PermutationTable, alpha: float) -> float:
    """Single critical value: empirical (1-alpha)-quantile of the overall maxima."""
    overall = np.sort(table.maxima.max(axis=1))
    m = table.n_perms
    idx = min(max(math.ceil((1.0 - alpha) * m), 1), m)
    return float(overall[idx - 1])
