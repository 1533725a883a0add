"""Enumeration geometry: loop bounds, counts, dedup index, determinism."""
import math

import numpy as np
import pytest

from blockscan.blocks import BlockSpec, block_range
from blockscan.enumeration import (RectangleIndex, count_all, count_block,
                                   enumerate_block, iter_block_rects)
from blockscan.errors import EmptyBlockRange

from conftest import make_dataset, recount


class TestBlockRange:
    def test_small_n_is_empty(self):
        assert list(block_range(8)) == []
        assert list(block_range(64)) == []   # top level comes out as 2

    def test_n_1000(self):
        assert list(block_range(1000)) == [3, 4, 5, 6]

    def test_smallest_nonempty(self):
        assert list(block_range(67)) == []
        assert list(block_range(68)) == [3]

    def test_block_spec_validates_level(self):
        with pytest.raises(ValueError):
            BlockSpec(2)
        with pytest.raises(ValueError):
            BlockSpec.for_dataset(4, 80)   # only level 3 exists at N=80
        assert BlockSpec.for_dataset(3, 80).ell == 3


class TestVisitor:
    def test_count_matches_arithmetic(self):
        ds = make_dataset(140, seed=5)
        for ell in block_range(140):
            block = BlockSpec(ell)
            visits = sum(1 for _ in iter_block_rects(ds, block))
            assert visits == count_block(ds, block)

    def test_enumerate_block_callback(self):
        ds = make_dataset(90, seed=6)
        block = BlockSpec(3)
        got = []
        n = enumerate_block(ds, block, got.append)
        assert n == len(got) == count_block(ds, block)

    def test_index_tuples_within_loop_bounds(self):
        ds = make_dataset(120, seed=7)
        for ell in block_range(120):
            block = BlockSpec(ell)
            for r in iter_block_rects(ds, block):
                assert 0 <= r.i <= ell
                assert 0 <= r.j <= block.j_max(r.i)
                assert r.j + 1 <= r.k <= r.j + block.k_span
                assert 0 <= r.m <= block.m_max(r.i)
                assert r.m + 1 <= r.n <= r.m + block.n_span

    def test_counts_match_direct_recount(self):
        # exact equality of every visited rectangle's counts vs an O(N) recount
        ds = make_dataset(75, seed=8)
        for ell in block_range(75):
            for r in iter_block_rects(ds, BlockSpec(ell)):
                if r.counts.n_in == 0:
                    continue
                xs = ds.xs[r.x_lo_rank - 1:r.x_hi_rank]
                strip_y = np.sort(ds.ys[r.x_lo_rank - 1:r.x_hi_rank])
                c = recount(ds, xs.min(), xs.max(),
                            strip_y[r.y_lo_rank - 1], strip_y[r.y_hi_rank - 1])
                assert c.n_in == r.counts.n_in
                assert c.ones_in == r.counts.ones_in

    def test_homogeneous_labels_stay_homogeneous(self):
        ds = make_dataset(100, seed=9)
        all_ones = ds.with_labels(np.ones(100, dtype=int))
        for r in iter_block_rects(all_ones, BlockSpec(3)):
            assert r.counts.ones_in == r.counts.n_in

    def test_determinism(self):
        ds = make_dataset(80, seed=10)
        a = [(r.i, r.j, r.k, r.m, r.n, r.counts.n_in, r.counts.ones_in)
             for r in iter_block_rects(ds, BlockSpec(3))]
        b = [(r.i, r.j, r.k, r.m, r.n, r.counts.n_in, r.counts.ones_in)
             for r in iter_block_rects(ds, BlockSpec(3))]
        assert a == b

    def test_unit_strips_cover_all_points(self):
        # at every level i the d=1 strips tile the dataset up to rounding
        ds = make_dataset(200, seed=11)
        for ell in block_range(200):
            block = BlockSpec(ell)
            for i in range(ell + 1):
                from blockscan.blocks import x_boundaries
                bnd = x_boundaries(block, i, 200)
                j_max = block.j_max(i)
                covered = np.zeros(200, dtype=bool)
                for j in range(j_max + 1):
                    lo, hi = int(bnd[j]) + 1, int(bnd[j + 1])
                    if hi >= lo:
                        covered[lo - 1:hi] = True
                assert covered.all()


class TestCountAll:
    def test_zero_below_threshold(self):
        assert count_all(make_dataset(50, seed=1)) == 0

    def test_sums_blocks(self):
        ds = make_dataset(150, seed=2)
        total = sum(count_block(ds, BlockSpec(ell)) for ell in block_range(150))
        assert count_all(ds) == total


class TestIndex:
    def test_matches_visitor_rect_set(self):
        ds = make_dataset(110, seed=12)
        idx = RectangleIndex(ds)
        for ell in idx.block_ids:
            seen = {}
            raw = 0
            for r in iter_block_rects(ds, BlockSpec(ell)):
                raw += 1
                if r.counts.n_in > 0:
                    key = (r.x_lo_rank, r.x_hi_rank, r.y_lo_rank, r.y_hi_rank)
                    seen[key] = (r.counts.n_in, r.counts.ones_in)
            br = idx.block(ell)
            assert br.n_raw == raw
            lo = idx.strip_lo[br.sid]
            hi = idx.strip_hi[br.sid]
            ones = idx.ones_in(ell)
            keys = set(zip(lo.tolist(), hi.tolist(), br.a.tolist(), br.b.tolist()))
            assert keys == set(seen)
            for t in range(len(br.sid)):
                k = (int(lo[t]), int(hi[t]), int(br.a[t]), int(br.b[t]))
                assert seen[k] == (int(br.n_in[t]), int(ones[t]))

    def test_empty_block_range_raises(self):
        with pytest.raises(EmptyBlockRange):
            RectangleIndex(make_dataset(40, seed=3))

    def test_representative_round_trip(self):
        ds = make_dataset(130, seed=13)
        idx = RectangleIndex(ds)
        for ell in idx.block_ids:
            br = idx.block(ell)
            block = BlockSpec(ell)
            step = max(1, len(br.sid) // 500)
            for ridx in range(0, len(br.sid), step):
                i, j, k, m, n = idx.representative(ell, ridx)
                u = block.x_step(i, ds.n_total)
                assert min(math.floor(j * u + 0.5), ds.n_total) + 1 == idx.strip_lo[br.sid[ridx]]
                assert min(math.floor(k * u + 0.5), ds.n_total) == idx.strip_hi[br.sid[ridx]]
                size = int(idx.strip_len[br.sid[ridx]])
                v = block.y_step(i, size)
                assert math.floor(m * v + 0.5) + 1 == br.a[ridx]
                assert min(math.floor(n * v + 0.5), size) == br.b[ridx]
                assert 0 <= i <= ell and 0 <= j <= block.j_max(i)
                assert j + 1 <= k <= j + block.k_span
                assert 0 <= m <= block.m_max(i) and m + 1 <= n <= m + block.n_span

    def test_build_deterministic(self):
        ds = make_dataset(100, seed=14)
        a, b = RectangleIndex(ds), RectangleIndex(ds)
        for ell in a.block_ids:
            assert np.array_equal(a.block(ell).sid, b.block(ell).sid)
            assert np.array_equal(a.block(ell).a, b.block(ell).a)
            assert np.array_equal(a.block(ell).b, b.block(ell).b)
        assert np.array_equal(a.seg_ids, b.seg_ids)


def test_cardinality_growth_is_far_from_quartic():
    # doubling N multiplies the naive distinct-rectangle family by ~16; the
    # approximating family's visited count grows by < 4 per doubling (the
    # jumps happen when a new block level opens) and its N*log2(N)^2
    # normalization stays within a constant band
    sizes = [256, 512, 1024, 2048]
    counts = [count_all(make_dataset(n, seed=n)) for n in sizes]
    for small, big in zip(counts, counts[1:]):
        assert big <= 4.0 * small
    norm = [c / (n * math.log2(n) ** 2) for c, n in zip(counts, sizes)]
    assert max(norm) / min(norm) < 3.0
