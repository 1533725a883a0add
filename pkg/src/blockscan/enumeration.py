"""Enumeration of the approximating rectangle family, block by block.

Rectangles are generated by five nested loops per block level ell
(see ``blocks``): level i, x-grid indices j < k defining a strip of
consecutive x-ranks, and y-grid indices m < n defining a window of
consecutive y-ranks inside the strip.  Per strip, the y-values are
extracted once, sorted once, and one cumulative label-sum array serves
every (m, n) window in constant time.

Two consumers share this geometry:

* ``enumerate_block`` visits every loop tuple exactly once (the reference
  path, practical for small N);
* ``RectangleIndex`` materializes the distinct realized rectangles, with
  duplicates from rounding collisions merged.  Duplicates are harmless for
  maxima and threshold tests, which is all downstream code computes, while
  ``count_block``/``count_all`` still report raw visited-tuple counts.

Strips that come out empty after rounding are skipped entirely (their
tuples are not visited); windows that come out empty inside a nonempty
strip are visited and flagged.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .blocks import BlockSpec, block_range, x_boundaries
from .errors import EmptyBlockRange
from .model import Dataset, round_half_up
from .statistic import Counts, llr_from_arrays

__all__ = ["ApproxRect", "enumerate_block", "iter_block_rects",
           "count_block", "count_all", "RectangleIndex"]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ApproxRect:
    """One enumerated rectangle, identified by its loop indices.

    Rank fields are 1-based: x ranks refer to the x-sorted dataset, y ranks
    to the strip's own y-sorted extraction.  ``empty`` marks windows whose
    realized point count is zero.
    """

    ell: int
    i: int
    j: int
    k: int
    m: int
    n: int
    x_lo_rank: int
    x_hi_rank: int
    y_lo_rank: int
    y_hi_rank: int
    counts: Counts

    @property
    def empty(self) -> bool:
        return self.counts.n_in == 0


def iter_block_rects(dataset: Dataset, block: BlockSpec) -> Iterator[ApproxRect]:
    """Visit every (i, j, k, m, n) tuple of the block in loop order.

    Reference implementation: clear, unvectorized, O(1) per tuple after the
    per-strip sort.  Use ``RectangleIndex`` for anything performance-minded.
    """
    n_total = dataset.n_total
    ones_total = dataset.ones_total
    d_span, n_span = block.k_span, block.n_span
    for i in range(block.ell + 1):
        bnd = x_boundaries(block, i, n_total)
        j_max = block.j_max(i)
        m_max = block.m_max(i)
        for j in range(j_max + 1):
            for k in range(j + 1, j + d_span + 1):
                lo = int(bnd[j]) + 1
                hi = int(bnd[k])
                if hi < lo:
                    log.debug("empty strip skipped: ell=%d i=%d j=%d k=%d", block.ell, i, j, k)
                    continue
                strip_y = dataset.ys[lo - 1:hi]
                strip_lab = dataset.labels[lo - 1:hi]
                order = np.argsort(strip_y, kind="stable")
                cum = np.concatenate(([0], np.cumsum(strip_lab[order])))
                size = hi - lo + 1
                v = block.y_step(i, size)
                for m in range(m_max + 1):
                    a = round_half_up(m * v) + 1
                    for n in range(m + 1, m + n_span + 1):
                        b = min(round_half_up(n * v), size)
                        if b >= a:
                            n_in = b - a + 1
                            ones_in = int(cum[b] - cum[a - 1])
                        else:
                            n_in, ones_in = 0, 0
                        yield ApproxRect(
                            ell=block.ell, i=i, j=j, k=k, m=m, n=n,
                            x_lo_rank=lo, x_hi_rank=hi,
                            y_lo_rank=a, y_hi_rank=b,
                            counts=Counts(n_in, ones_in, n_total, ones_total))


def enumerate_block(dataset: Dataset, block: BlockSpec,
                    visit: Callable[[ApproxRect], None]) -> int:
    """Apply ``visit`` to every rectangle of the block; returns the visit count."""
    count = 0
    for rect in iter_block_rects(dataset, block):
        visit(rect)
        count += 1
    return count


def count_block(dataset: Dataset, block: BlockSpec) -> int:
    """Number of tuples ``enumerate_block`` visits, by rank arithmetic alone."""
    total = 0
    d_span, n_span = block.k_span, block.n_span
    for i in range(block.ell + 1):
        bnd = x_boundaries(block, i, dataset.n_total)
        j_max = block.j_max(i)
        per_strip = (block.m_max(i) + 1) * n_span
        lo = bnd[0:j_max + 1] + 1
        for d in range(1, d_span + 1):
            hi = bnd[d:j_max + 1 + d]
            total += int((hi >= lo).sum()) * per_strip
    return total


def count_all(dataset: Dataset) -> int:
    """Total visited tuples across all blocks; 0 when the block range is empty."""
    return sum(count_block(dataset, BlockSpec(ell))
               for ell in block_range(dataset.n_total))


def _pack_keys(sid: np.ndarray, a: np.ndarray, b: np.ndarray, shift: int) -> np.ndarray:
    return (sid.astype(np.int64) << (2 * shift)) | (a.astype(np.int64) << shift) | b.astype(np.int64)


class _StripStore:
    """Unique x-rank strips with their y-sorted point extraction, shared by all blocks."""

    def __init__(self, dataset: Dataset):
        self.dataset = dataset
        self._by_key: dict[int, int] = {}
        self.lo: list[int] = []
        self.hi: list[int] = []
        self._seg_ids: list[np.ndarray] = []
        self._seg_y: list[np.ndarray] = []
        self._lens: list[int] = []

    def register(self, los: np.ndarray, his: np.ndarray) -> np.ndarray:
        """Map (lo, hi) rank pairs to strip ids, extracting any new strips."""
        keys = (los.astype(np.int64) << 32) | his.astype(np.int64)
        sids = np.empty(len(keys), dtype=np.int64)
        new_lo, new_hi, new_pos = [], [], []
        for t, key in enumerate(keys.tolist()):
            sid = self._by_key.get(key)
            if sid is None:
                sid = len(self._by_key)
                self._by_key[key] = sid
                new_lo.append(int(los[t]))
                new_hi.append(int(his[t]))
            sids[t] = sid
        if new_lo:
            self._extract(np.array(new_lo, dtype=np.int64), np.array(new_hi, dtype=np.int64))
        return sids

    def _extract(self, los: np.ndarray, his: np.ndarray) -> None:
        ys = self.dataset.ys
        lens = his - los + 1
        total = int(lens.sum())
        offs = np.concatenate(([0], np.cumsum(lens)[:-1]))
        # 0-based x-rank position of every strip member, strips concatenated
        idx = (np.arange(total, dtype=np.int64)
               - np.repeat(offs, lens) + np.repeat(los - 1, lens))
        seg = np.repeat(np.arange(len(los), dtype=np.int64), lens)
        yv = ys[idx]
        order = np.lexsort((yv, seg))
        idx_sorted = idx[order].astype(np.int32)
        y_sorted = yv[order]
        bounds = np.concatenate(([0], np.cumsum(lens)))
        for t in range(len(los)):
            sl = slice(int(bounds[t]), int(bounds[t + 1]))
            self._seg_ids.append(idx_sorted[sl])
            self._seg_y.append(y_sorted[sl])
            self.lo.append(int(los[t]))
            self.hi.append(int(his[t]))
            self._lens.append(int(lens[t]))

    def finalize(self):
        lo = np.array(self.lo, dtype=np.int64)
        hi = np.array(self.hi, dtype=np.int64)
        lens = np.array(self._lens, dtype=np.int64)
        seg_off = np.concatenate(([0], np.cumsum(lens)))
        seg_ids = (np.concatenate(self._seg_ids) if self._seg_ids
                   else np.empty(0, dtype=np.int32))
        seg_y = (np.concatenate(self._seg_y) if self._seg_y
                 else np.empty(0, dtype=np.float64))
        return lo, hi, lens, seg_off, seg_ids, seg_y


@dataclass
class _BlockRects:
    """Distinct nonempty rectangles of one block, in packed-key order."""

    ell: int
    sid: np.ndarray     # strip id
    a: np.ndarray       # 1-based lower y-rank within strip
    b: np.ndarray       # 1-based upper y-rank within strip
    n_in: np.ndarray
    n_raw: int          # visited tuples, duplicates and empties included
    # variant table in enumeration order: columns i, j, k, strip id
    variants: np.ndarray


class RectangleIndex:
    """Materialized geometry of the whole approximating family for one dataset.

    Memory scales with the number of distinct rectangles, which is roughly
    N log^2 N with a large constant; intended for datasets up to a few
    thousand points.  Larger N should use the streaming evaluator in
    ``bench``.
    """

    def __init__(self, dataset: Dataset, blocks: list[int] | None = None):
        self.dataset = dataset
        rng = block_range(dataset.n_total)
        self.block_ids = list(rng) if blocks is None else list(blocks)
        if not self.block_ids:
            raise EmptyBlockRange(f"no blocks for N={dataset.n_total}")
        store = _StripStore(dataset)
        self._blocks: dict[int, _BlockRects] = {}
        for ell in self.block_ids:
            self._blocks[ell] = self._build_block(BlockSpec(ell), store)
        (self.strip_lo, self.strip_hi, self.strip_len,
         self.seg_off, self.seg_ids, self.seg_y) = store.finalize()
        self._obs_ones: dict[int, np.ndarray] = {}

    # -- construction -----------------------------------------------------

    def _build_block(self, block: BlockSpec, store: _StripStore) -> _BlockRects:
        ds = self.dataset
        n_total = ds.n_total
        d_span, n_span = block.k_span, block.n_span
        shift = max(int(n_total).bit_length() + 1, 2)
        key_chunks: list[np.ndarray] = []
        variants = []
        n_raw = 0
        for i in range(block.ell + 1):
            bnd = x_boundaries(block, i, n_total)
            j_max = block.j_max(i)
            m_max = block.m_max(i)
            per_strip = (m_max + 1) * n_span
            j_arr = np.arange(j_max + 1, dtype=np.int64)
            lo_all = bnd[0:j_max + 1] + 1
            for d in range(1, d_span + 1):
                hi_all = bnd[d:j_max + 1 + d]
                keep = hi_all >= lo_all
                if not keep.any():
                    continue
                los, his, js = lo_all[keep], hi_all[keep], j_arr[keep]
                n_raw += len(los) * per_strip
                sids = store.register(los, his)
                lens = his - los + 1
                for jj, sid in zip(js.tolist(), sids.tolist()):
                    variants.append((i, jj, jj + d, sid))
                # y grids for the whole strip batch: rows = strips
                v = block.y_step(i, lens.astype(np.float64))
                m_idx = np.arange(m_max + 1, dtype=np.float64)
                n_idx = np.arange(1, m_max + n_span + 1, dtype=np.float64)
                a2 = np.floor(np.multiply.outer(v, m_idx) + 0.5).astype(np.int64) + 1
                b2 = np.minimum(
                    np.floor(np.multiply.outer(v, n_idx) + 0.5).astype(np.int64),
                    lens[:, None])
                sid_col = sids[:, None]
                for delta in range(1, n_span + 1):
                    bslice = b2[:, delta - 1:delta - 1 + m_max + 1]
                    ok = bslice >= a2
                    if not ok.any():
                        continue
                    keys = _pack_keys(np.broadcast_to(sid_col, a2.shape)[ok],
                                      a2[ok], bslice[ok], shift)
                    key_chunks.append(np.unique(keys))
        if key_chunks:
            keys = np.unique(np.concatenate(key_chunks))
        else:
            keys = np.empty(0, dtype=np.int64)
        mask = (1 << shift) - 1
        b = (keys & mask).astype(np.int64)
        a = ((keys >> shift) & mask).astype(np.int64)
        sid = (keys >> (2 * shift)).astype(np.int64)
        return _BlockRects(
            ell=block.ell, sid=sid, a=a, b=b,
            n_in=(b - a + 1), n_raw=n_raw,
            variants=np.array(variants, dtype=np.int64).reshape(-1, 4))

    # -- basic accessors ---------------------------------------------------

    @property
    def n_distinct(self) -> int:
        return sum(len(br.sid) for br in self._blocks.values())

    @property
    def n_raw(self) -> int:
        return sum(br.n_raw for br in self._blocks.values())

    def block(self, ell: int) -> _BlockRects:
        return self._blocks[ell]

    def strip_x_bounds(self, sid) -> tuple[np.ndarray, np.ndarray]:
        """Realized x-coordinate bounds of strips (closed interval)."""
        xs = self.dataset.xs
        return xs[self.strip_lo[sid] - 1], xs[self.strip_hi[sid] - 1]

    def rect_y_bounds(self, sid, a, b) -> tuple[np.ndarray, np.ndarray]:
        """Realized y-coordinate bounds: strip order statistics at ranks a and b."""
        pos = self.seg_off[sid]
        return self.seg_y[pos + a - 1], self.seg_y[pos + b - 1]

    # -- observed statistics ----------------------------------------------

    def ones_in(self, ell: int, labels: np.ndarray | None = None) -> np.ndarray:
        """Label-1 counts of every distinct rectangle of a block."""
        if labels is None:
            key = ell
            if key in self._obs_ones:
                return self._obs_ones[key]
            labels = self.dataset.labels
            cache = True
        else:
            cache = False
        cs = np.concatenate(([0], np.cumsum(labels[self.seg_ids], dtype=np.int64)))
        br = self._blocks[ell]
        pos = self.seg_off[br.sid]
        ones = (cs[pos + br.b] - cs[pos + br.a - 1]).astype(np.int64)
        if cache:
            self._obs_ones[key] = ones
        return ones

    def t_values(self, ell: int, labels: np.ndarray | None = None,
                 two_sided: bool = False) -> np.ndarray:
        """Observed statistic of every distinct rectangle of a block."""
        br = self._blocks[ell]
        ones = self.ones_in(ell, labels)
        return llr_from_arrays(br.n_in, ones, self.dataset.n_total,
                               self.dataset.ones_total, two_sided=two_sided)

    # -- representative loop tuple for a realized rectangle ----------------

    def representative(self, ell: int, ridx: int) -> tuple[int, int, int, int, int]:
        """First (i, j, k, m, n) in enumeration order generating rectangle ``ridx``.

        Inverts the rank grids; a tuple must exist because the rectangle was
        produced by the same grids during construction.
        """
        br = self._blocks[ell]
        block = BlockSpec(ell)
        sid = int(br.sid[ridx])
        a, b = int(br.a[ridx]), int(br.b[ridx])
        size = int(self.strip_len[sid])
        for i, j, k, vsid in br.variants.tolist():
            if vsid != sid:
                continue
            mn = _invert_window(a, b, block.y_step(i, size), size,
                                block.m_max(i), block.n_span)
            if mn is not None:
                return (int(i), int(j), int(k), mn[0], mn[1])
        raise AssertionError(
            f"no generating tuple for rect {ridx} of block {ell}; enumeration bug")


def _plateau(value: int, v: float, t_min: int, t_max: int) -> tuple[int, int] | None:
    """Range of t in [t_min, t_max] with round_half_up(t*v) == value, if any.

    The guesses come from rank arithmetic; a short verification scan absorbs
    float rounding at the plateau edges.
    """
    lo_guess = max(t_min, int(np.ceil((value - 0.5) / v)) - 3)
    lo = None
    for t in range(lo_guess, min(lo_guess + 8, t_max + 1)):
        if round_half_up(t * v) == value:
            lo = t
            break
    if lo is None:
        return None
    hi_guess = min(t_max, int(np.floor((value + 0.5) / v)) + 3)
    hi = None
    for t in range(hi_guess, lo - 1, -1):
        if round_half_up(t * v) == value:
            hi = t
            break
    return (lo, hi) if hi is not None else None


def _invert_window(a: int, b: int, v: float, size: int,
                   m_max: int, n_span: int) -> tuple[int, int] | None:
    """First (m, n) in loop order with a(m) == a and b(n) == b, if any.

    a(m) = round(m*v) + 1 and b(n) = min(round(n*v), size) are nondecreasing
    step functions, so the candidate m and n form plateaus; the loop-order
    first pair is the smallest feasible m in the a-plateau and the smallest
    n >= max(m+1, start of the b-plateau) within the band n <= m + n_span.
    """
    n_max = m_max + n_span
    mp = _plateau(a - 1, v, 0, m_max)
    if mp is None:
        return None
    m_lo, m_hi = mp
    if b == size:
        # clamped: any n with round(n*v) >= size qualifies
        guess = max(1, int(np.ceil((size - 0.5) / v)) - 3)
        n_lo = None
        for t in range(guess, min(guess + 8, n_max + 1)):
            if min(round_half_up(t * v), size) == b:
                n_lo = t
                break
        if n_lo is None:
            return None
        n_hi = n_max
    else:
        np_ = _plateau(b, v, 1, n_max)
        if np_ is None:
            return None
        n_lo, n_hi = np_
    m = max(m_lo, n_lo - n_span)
    if m > min(m_hi, n_hi - 1):
        return None
    n = max(n_lo, m + 1)
    if n > min(n_hi, m + n_span):
        return None
    return (m, n)
