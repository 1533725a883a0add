"""Brute-force scan, exact tails, approximation quality measurement."""
import math

import numpy as np
import pytest
import scipy.stats

from blockscan.blocks import BlockSpec, block_range
from blockscan.enumeration import RectangleIndex, iter_block_rects
from blockscan.errors import TooLarge
from blockscan.model import Dataset
from blockscan.oracle import (approx_quality, brute_force_max,
                              containment_witness, exact_tail)
from blockscan.statistic import Counts, HypergeomParams, llr, tail_bound

from conftest import make_dataset

# 3*ln(10/3) + 7*ln(10/7), the cluster of three 1s among ten points
HAND_MAX_T = 6.1086430205489349


class TestBruteForce:
    def test_hand_enumerable_fixture(self):
        # ten points on a diagonal; the 1s sit at ranks 3..5.  Every rank
        # rectangle capturing exactly those three points ties at the maximum;
        # the lexicographically smallest is x-ranks [1,5] with y-ranks [3,5]
        # (the y-window already excludes points 1 and 2)
        labels = [0, 0, 1, 1, 1, 0, 0, 0, 0, 0]
        ds = Dataset.from_points(np.arange(10.0), np.arange(10.0), labels)
        t, rect = brute_force_max(ds)
        assert t == pytest.approx(HAND_MAX_T, rel=1e-14)
        assert (rect.x_lo_rank, rect.x_hi_rank) == (1, 5)
        assert (rect.y_lo_rank, rect.y_hi_rank) == (3, 5)
        assert rect.counts == Counts(3, 3, 10, 3)

    def test_uniform_labels_give_zero(self):
        ds = Dataset.from_points(np.arange(8.0), np.arange(8.0), [1] * 8)
        t, _ = brute_force_max(ds)
        assert t == 0.0

    def test_size_guard(self):
        with pytest.raises(TooLarge):
            brute_force_max(make_dataset(81, seed=1))

    def test_enumerated_family_is_dominated(self):
        # the approximating family is a subfamily of all rank rectangles
        for seed in range(5):
            ds = make_dataset(int(np.random.default_rng(seed).integers(68, 81)),
                              seed=seed + 100)
            brute_t, _ = brute_force_max(ds)
            best = 0.0
            for ell in block_range(ds.n_total):
                for r in iter_block_rects(ds, BlockSpec(ell)):
                    if 0 < r.counts.n_in < ds.n_total:
                        best = max(best, llr(r.counts))
            assert best <= brute_t + 1e-12

    def test_ties_resolve_lexicographically(self):
        # two symmetric singleton clusters of 1s produce tied maxima
        labels = [1, 0, 0, 0, 0, 0, 0, 1]
        ds = Dataset.from_points(np.arange(8.0), np.arange(8.0), labels)
        _, rect = brute_force_max(ds)
        assert (rect.x_lo_rank, rect.x_hi_rank, rect.y_lo_rank, rect.y_hi_rank) \
            == (1, 1, 1, 1)


class TestExactTail:
    def test_point_mass_top(self):
        p = HypergeomParams(50, 20, 10, 10)
        pmf_top = math.exp(
            math.lgamma(21) - math.lgamma(11) - math.lgamma(11)
            + math.lgamma(31) - math.lgamma(31)
            - (math.lgamma(51) - math.lgamma(11) - math.lgamma(41)))
        assert exact_tail(p, "upper") == pytest.approx(pmf_top, rel=1e-12)

    def test_lower_at_support_start(self):
        p = HypergeomParams(50, 20, 10, 0)
        assert exact_tail(p, "lower") == pytest.approx(
            float(scipy.stats.hypergeom.pmf(0, 50, 20, 10)), rel=1e-12)

    def test_complementarity(self):
        for x in range(1, 11):
            up = exact_tail(HypergeomParams(50, 20, 10, x), "upper")
            lo = exact_tail(HypergeomParams(50, 20, 10, x - 1), "lower")
            assert up + lo == pytest.approx(1.0, abs=1e-12)

    def test_against_scipy(self):
        rng = np.random.default_rng(4)
        for _ in range(40):
            n_tot = int(rng.integers(10, 400))
            reds = int(rng.integers(1, n_tot))
            draws = int(rng.integers(1, n_tot))
            lo = max(0, draws + reds - n_tot)
            hi = min(draws, reds)
            x = int(rng.integers(lo, hi + 1))
            p = HypergeomParams(n_tot, reds, draws, x)
            sf = float(scipy.stats.hypergeom.sf(x - 1, n_tot, reds, draws))
            cdf = float(scipy.stats.hypergeom.cdf(x, n_tot, reds, draws))
            assert exact_tail(p, "upper") == pytest.approx(sf, rel=1e-9, abs=1e-13)
            assert exact_tail(p, "lower") == pytest.approx(cdf, rel=1e-9, abs=1e-13)

    def test_bound_dominates_exact(self):
        p = HypergeomParams(50, 20, 10, 8)
        assert exact_tail(p, "upper") <= tail_bound(p, "upper")
        p0 = HypergeomParams(50, 20, 10, 0)
        assert exact_tail(p0, "lower") <= tail_bound(p0, "lower")

    def test_size_guard(self):
        with pytest.raises(TooLarge):
            exact_tail(HypergeomParams(4000, 100, 100, 10), "upper")


@pytest.fixture(scope="module")
def quality_setup():
    ds = make_dataset(500, seed=41)
    return ds, RectangleIndex(ds)


class TestApproxQuality:
    def test_enumerated_rect_has_zero_loss(self, quality_setup):
        # pick an enumerated rectangle whose realized mass falls inside its
        # own block's stratum; the search must then find it (or an equal one)
        ds, idx = quality_setup
        n = ds.n_total
        br = idx.block(4)
        in_stratum = np.nonzero((br.n_in * 2 ** 5 > n) & (br.n_in * 2 ** 4 <= n))[0]
        pick = int(in_stratum[len(in_stratum) // 3])
        x_lo, x_hi = idx.strip_x_bounds(br.sid[pick:pick + 1])
        y_lo, y_hi = idx.rect_y_bounds(br.sid[pick:pick + 1],
                                       br.a[pick:pick + 1], br.b[pick:pick + 1])
        (ell, best), ratio = approx_quality(
            ds, idx, (float(x_lo[0]), float(x_hi[0]), float(y_lo[0]), float(y_hi[0])))
        assert ell == 4
        assert ratio == 0.0

    def test_random_rects_meet_block_guarantee(self, quality_setup):
        ds, idx = quality_setup
        rng = np.random.default_rng(7)
        n = ds.n_total
        checked = 0
        for _ in range(60):
            ell = int(rng.integers(3, max(idx.block_ids) + 1))
            target = int(rng.integers(max(1, n // 2 ** (ell + 1) + 1), n // 2 ** ell + 1))
            r0 = int(rng.integers(0, n - target))
            width = int(rng.integers(target, min(n - r0, 4 * target)))
            xs = ds.xs[r0:r0 + width]
            ys = np.sort(ds.ys[r0:r0 + width])
            if len(ys) < target:
                continue
            off = int(rng.integers(0, len(ys) - target + 1))
            rect = (float(xs.min()), float(xs.max()),
                    float(ys[off]), float(ys[off + target - 1]))
            from blockscan.oracle import _points_in_rect
            _, _, cnt = _points_in_rect(ds, rect)
            if not (n / 2 ** (ell + 1) < cnt <= n / 2 ** ell):
                continue
            (got_ell, _), ratio = approx_quality(ds, idx, rect)
            assert got_ell == ell
            assert ratio <= ell ** -0.5 + 4.0 / (n * cnt / n)
            checked += 1
        assert checked >= 10

    def test_mass_above_one_eighth_rejected(self, quality_setup):
        ds, idx = quality_setup
        with pytest.raises(ValueError):
            approx_quality(ds, idx, (float(ds.xs.min()), float(ds.xs.max()),
                                     float(ds.ys.min()), float(ds.ys.max())))

    def test_witness_agrees_with_search(self, quality_setup):
        ds, idx = quality_setup
        rng = np.random.default_rng(8)
        n = ds.n_total
        found = 0
        for _ in range(40):
            target = int(rng.integers(20, 60))
            r0 = int(rng.integers(0, n - 2 * target))
            width = 2 * target
            xs = ds.xs[r0:r0 + width]
            ys = np.sort(ds.ys[r0:r0 + width])
            off = int(rng.integers(0, len(ys) - target + 1))
            rect = (float(xs.min()), float(xs.max()),
                    float(ys[off]), float(ys[off + target - 1]))
            wit = containment_witness(ds, rect)
            if wit is None:
                continue
            ell, i, j, k, m, nn, n_in = wit
            found += 1
            # witness must be inside and no better than the searched optimum
            from blockscan.oracle import _points_in_rect
            _, _, cnt = _points_in_rect(ds, rect)
            (ell2, best), ratio = approx_quality(ds, idx, rect)
            br = idx.block(ell2)
            assert ell2 == ell
            assert (cnt - n_in) / n / (cnt / n) >= ratio - 1e-12
        assert found >= 20
