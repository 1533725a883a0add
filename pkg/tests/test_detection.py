"""Scan detections, minimal-rectangle filtering, and report consistency."""
import numpy as np
import pytest

from blockscan.calibration import simulate_null, solve_alpha_tilde
from blockscan.detection import (Detection, blocked_scan, conventional_scan,
                                 detections_to_dicts, minimal_rects)
from blockscan.enumeration import RectangleIndex
from blockscan.errors import BlockMismatch
from blockscan.statistic import Counts, llr

from conftest import make_dataset, recount


def det(x_lo, x_hi, y_lo, y_hi, t=5.0, ell=3):
    return Detection(ell=ell, i=0, j=0, k=1, m=0, n=1,
                     x_lo=x_lo, x_hi=x_hi, y_lo=y_lo, y_hi=y_hi,
                     n_in=10, ones_in=8, t_value=t, threshold=1.0)


class TestMinimalRects:
    def test_singleton(self):
        d = det(0, 1, 0, 1)
        assert minimal_rects([d]) == [d]

    def test_nested_keeps_inner(self):
        outer = det(0, 10, 0, 10)
        inner = det(2, 3, 2, 3)
        assert minimal_rects([outer, inner]) == [inner]

    def test_disjoint_keeps_both(self):
        a = det(0, 1, 0, 1)
        b = det(5, 6, 5, 6, t=7.0)
        assert set(minimal_rects([a, b])) == {a, b}

    def test_overlapping_but_not_nested_keeps_both(self):
        a = det(0, 5, 0, 5)
        b = det(3, 8, 3, 8)
        assert set(minimal_rects([a, b])) == {a, b}

    def test_equal_boxes_both_survive(self):
        a = det(0, 1, 0, 1, ell=3)
        b = det(0, 1, 0, 1, ell=4)
        assert set(minimal_rects([a, b])) == {a, b}

    def test_chain_keeps_only_smallest(self):
        chain = [det(0, 10 - i, 0, 10 - i) for i in range(4)]
        assert minimal_rects(chain) == [chain[-1]]

    def test_output_order_block_then_statistic(self):
        a = det(0, 1, 0, 1, t=2.0, ell=3)
        b = det(5, 6, 0, 1, t=9.0, ell=4)
        c = det(8, 9, 0, 1, t=4.0, ell=4)
        assert minimal_rects([a, b, c]) == [b, c, a]

    def test_antichain_property(self):
        rng = np.random.default_rng(0)
        dets = []
        for _ in range(60):
            x = np.sort(rng.random(2) * 10)
            y = np.sort(rng.random(2) * 10)
            dets.append(det(x[0], x[1], y[0], y[1], t=float(rng.random())))
        out = minimal_rects(dets)
        for a in out:
            for b in out:
                if a is b:
                    continue
                strictly_inside = (a.x_lo <= b.x_lo and a.x_hi >= b.x_hi
                                   and a.y_lo <= b.y_lo and a.y_hi >= b.y_hi
                                   and (a.x_lo, a.x_hi, a.y_lo, a.y_hi)
                                   != (b.x_lo, b.x_hi, b.y_lo, b.y_hi))
                assert not strictly_inside


@pytest.fixture(scope="module")
def scan_setup():
    ds = make_dataset(300, seed=31, p=0.35)
    idx = RectangleIndex(ds)
    table = simulate_null(ds, 200, seed=5, index=idx)
    cal = solve_alpha_tilde(table, 0.2)
    return ds, idx, table, cal


class TestScans:
    def test_detections_exceed_thresholds(self, scan_setup):
        ds, idx, table, cal = scan_setup
        for d in blocked_scan(ds, cal, index=idx):
            assert d.t_value > d.threshold
            assert d.threshold == cal.thresholds[d.ell]

    def test_detection_recount_exact(self, scan_setup):
        # recomputing T from raw points reproduces the stored value exactly
        ds, idx, table, cal = scan_setup
        dets = blocked_scan(ds, cal, index=idx)
        assert dets, "fixture should produce at least one detection at alpha=0.2"
        for d in dets:
            c = recount(ds, d.x_lo, d.x_hi, d.y_lo, d.y_hi)
            assert (c.n_in, c.ones_in) == (d.n_in, d.ones_in)
            assert llr(c) == d.t_value

    def test_conventional_uses_single_threshold(self, scan_setup):
        ds, idx, table, cal = scan_setup
        dets = conventional_scan(ds, table, 0.2, index=idx)
        thrs = {d.threshold for d in dets}
        assert len(thrs) <= 1

    def test_block_mismatch_detected(self, scan_setup):
        ds, idx, table, cal = scan_setup
        other = make_dataset(1200, seed=32)   # different block range
        other_idx = RectangleIndex(other)
        with pytest.raises(BlockMismatch):
            blocked_scan(other, cal, index=other_idx)

    def test_alpha_near_one_fires_everywhere(self, scan_setup):
        ds, idx, table, cal = scan_setup
        dets = conventional_scan(ds, table, 1 - 1e-9, index=idx)
        assert len(dets) > 0

    def test_representative_indices_regenerate_detection(self, scan_setup):
        from blockscan.blocks import BlockSpec, x_boundaries
        from blockscan.model import round_half_up
        ds, idx, table, cal = scan_setup
        for d in blocked_scan(ds, cal, index=idx)[:50]:
            block = BlockSpec(d.ell)
            bnd = x_boundaries(block, d.i, ds.n_total)
            lo, hi = int(bnd[d.j]) + 1, int(bnd[d.k])
            assert ds.xs[lo - 1] == d.x_lo and ds.xs[hi - 1] == d.x_hi
            strip_y = np.sort(ds.ys[lo - 1:hi])
            v = block.y_step(d.i, hi - lo + 1)
            a = round_half_up(d.m * v) + 1
            b = min(round_half_up(d.n * v), hi - lo + 1)
            assert strip_y[a - 1] == d.y_lo and strip_y[b - 1] == d.y_hi

    def test_dict_serialization_fields(self, scan_setup):
        ds, idx, table, cal = scan_setup
        dets = blocked_scan(ds, cal, index=idx)
        d = detections_to_dicts(dets)[0]
        assert set(d) == {"ell", "i", "j", "k", "m", "n", "x_lo", "x_hi",
                          "y_lo", "y_hi", "n_in", "ones_in", "t", "threshold"}
