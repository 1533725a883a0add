"""Streaming block evaluation and the runtime-scaling benchmark.

The materialized index is quadratic-ish in memory relative to what a single
pass needs, so the benchmark (and anything with very large N) uses this
streaming path: per (level, strip batch) it extracts, sorts, builds the
label cumulative sums, evaluates the statistic on every loop tuple through
table lookups, and keeps only counts and maxima.
"""
from __future__ import annotations

import math
import multiprocessing
import time
from dataclasses import dataclass

import numpy as np

from .blocks import BlockSpec, block_range, x_boundaries
from .model import Dataset
from .synth import MixtureComponent, SynthConfig, sample_dataset

__all__ = ["stream_block", "stream_all", "BenchRow", "run_bench", "loglog_slope"]


def _xlogx_table(n: int) -> np.ndarray:
    k = np.arange(n + 1, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = k * np.log(k)
    g[0] = 0.0
    return g


@dataclass
class _StreamTotals:
    visited: int = 0
    nonempty: int = 0
    max_t: float = 0.0

    def merge(self, other: "_StreamTotals") -> None:
        self.visited += other.visited
        self.nonempty += other.nonempty
        self.max_t = max(self.max_t, other.max_t)


def _stream_level(dataset: Dataset, block: BlockSpec, i: int,
                  two_sided: bool, chunk_elems: int = 2_000_000) -> _StreamTotals:
    """Evaluate every tuple of one (block, level) pair; constants via tables."""
    n_total = dataset.n_total
    ones_total = dataset.ones_total
    g = _xlogx_table(n_total)
    const = g[n_total] - g[ones_total] - g[n_total - ones_total]
    totals = _StreamTotals()
    bnd = x_boundaries(block, i, n_total)
    j_max = block.j_max(i)
    m_max = block.m_max(i)
    n_span = block.n_span
    lo_all = bnd[0:j_max + 1] + 1
    m_idx = np.arange(m_max + 1, dtype=np.float64)
    n_idx = np.arange(1, m_max + n_span + 1, dtype=np.float64)
    row_elems = m_max + 1 + n_span
    strips_per_chunk = max(1, int(chunk_elems // row_elems))
    for d in range(1, block.k_span + 1):
        hi_all = bnd[d:j_max + 1 + d]
        keep = np.nonzero(hi_all >= lo_all)[0]
        totals.visited += len(keep) * (m_max + 1) * n_span
        for s0 in range(0, len(keep), strips_per_chunk):
            sel = keep[s0:s0 + strips_per_chunk]
            los, his = lo_all[sel], hi_all[sel]
            lens = his - los + 1
            total = int(lens.sum())
            offs = np.concatenate(([0], np.cumsum(lens)))
            idx = (np.arange(total, dtype=np.int64)
                   - np.repeat(offs[:-1], lens) + np.repeat(los - 1, lens))
            seg = np.repeat(np.arange(len(sel), dtype=np.int64), lens)
            yv = dataset.ys[idx]
            order = np.lexsort((yv, seg))
            lab = dataset.labels[idx[order]]
            cs = np.concatenate(([0], np.cumsum(lab, dtype=np.int64)))
            v = block.y_step(i, lens.astype(np.float64))
            a2 = np.floor(np.multiply.outer(v, m_idx) + 0.5).astype(np.int64) + 1
            b2 = np.minimum(
                np.floor(np.multiply.outer(v, n_idx) + 0.5).astype(np.int64),
                lens[:, None])
            apos = offs[:-1, None] + a2 - 1
            bpos = offs[:-1, None] + b2
            cs_a = cs[apos]
            cs_b = cs[bpos]
            for delta in range(1, n_span + 1):
                sl = slice(delta - 1, delta - 1 + m_max + 1)
                nwin = b2[:, sl] - a2 + 1
                o = cs_b[:, sl] - cs_a
                live = nwin > 0
                totals.nonempty += int(live.sum())
                t = (g[o] + g[nwin - o] + g[ones_total - o]
                     + g[n_total - nwin - ones_total + o]
                     - g[nwin] - g[n_total - nwin] + const)
                if two_sided:
                    ok = live & (o * (n_total - nwin) != (ones_total - o) * nwin)
                else:
                    ok = live & (o * (n_total - nwin) > (ones_total - o) * nwin)
                if ok.any():
                    mx = float(t[ok].max())
                    if mx > totals.max_t:
                        totals.max_t = mx
    return totals


_STREAM_STATE: dict = {}


def _stream_task(args):
    ell, i = args
    ds = _STREAM_STATE["dataset"]
    return (ell, i), _stream_level(ds, BlockSpec(ell), i, _STREAM_STATE["two_sided"])


def stream_block(dataset: Dataset, block: BlockSpec, two_sided: bool = False) -> tuple[int, int, float]:
    """(visited, nonempty, max T) for one block via the streaming path."""
    totals = _StreamTotals()
    for i in range(block.ell + 1):
        totals.merge(_stream_level(dataset, block, i, two_sided))
    return totals.visited, totals.nonempty, totals.max_t


def stream_all(dataset: Dataset, two_sided: bool = False,
               workers: int = 1) -> tuple[int, int, float]:
    """(visited, nonempty, max T) over all blocks; parallel over (block, level)."""
    tasks = [(ell, i) for ell in block_range(dataset.n_total)
             for i in range(ell + 1)]
    totals = _StreamTotals()
    if workers > 1 and len(tasks) > 1:
        global _STREAM_STATE
        _STREAM_STATE = {"dataset": dataset, "two_sided": two_sided}
        try:
            ctx = multiprocessing.get_context("fork")
            with ctx.Pool(processes=workers) as pool:
                for _, part in pool.imap_unordered(_stream_task, tasks):
                    totals.merge(part)
        finally:
            _STREAM_STATE = {}
    else:
        for ell, i in tasks:
            totals.merge(_stream_level(dataset, BlockSpec(ell), i, two_sided))
    return totals.visited, totals.nonempty, totals.max_t


@dataclass(frozen=True)
class BenchRow:
    n_points: int
    visited: int
    seconds: float
    max_t: float


def _null_config(n: int, seed: int) -> SynthConfig:
    return SynthConfig(n_points=n, base_p=0.4, strip_p=0.4, box_p=0.4, seed=seed)


def run_bench(sizes: list[int], seed: int, workers: int = 1) -> list[BenchRow]:
    """Time enumeration + statistic evaluation (no permutations) per size."""
    rows = []
    for n in sizes:
        dataset = sample_dataset(_null_config(n, seed))
        t0 = time.perf_counter()
        visited, _, max_t = stream_all(dataset, workers=workers)
        dt = time.perf_counter() - t0
        rows.append(BenchRow(n_points=n, visited=visited, seconds=dt, max_t=max_t))
    return rows


def loglog_slope(rows: list[BenchRow]) -> float:
    """Least-squares slope of log(seconds) against log(N)."""
    x = np.log([r.n_points for r in rows])
    y = np.log([max(r.seconds, 1e-9) for r in rows])
    return float(np.polyfit(x, y, 1)[0])
