"""Ingestion, sorted storage and order-statistic access."""
import io

import numpy as np
import pytest

from blockscan.errors import EmptyInput, ParseError
from blockscan.model import Dataset, LabeledPoint, ingest_csv, order_stat, order_stat_x

from conftest import csv_bytes


class TestIngest:
    def test_three_valid_rows(self):
        ds = ingest_csv(csv_bytes(["1.0,2.0,1", "0.5,0.1,0", "3.25,-1,1"]))
        assert ds.n_total == 3
        assert ds.ones_total == 2
        assert ds.pbar == pytest.approx(2 / 3)

    def test_sorted_by_x(self):
        ds = ingest_csv(csv_bytes(["3,0,0", "1,0,1", "2,0,0"]))
        assert list(ds.xs) == [1.0, 2.0, 3.0]
        assert list(ds.labels) == [1, 0, 0]

    def test_tie_break_by_y_then_input_order(self):
        ds = ingest_csv(csv_bytes(["1,5,1", "1,2,0", "0,9,1"]))
        assert list(ds.xs) == [0.0, 1.0, 1.0]
        assert list(ds.ys) == [9.0, 2.0, 5.0]

    def test_header_only_is_empty_input(self):
        with pytest.raises(EmptyInput):
            ingest_csv(csv_bytes([]))

    def test_no_header_at_all(self):
        with pytest.raises(EmptyInput):
            ingest_csv(io.BytesIO(b""))

    def test_label_two_is_parse_error_with_row(self):
        with pytest.raises(ParseError) as exc:
            ingest_csv(csv_bytes(["1,1,1", "2,2,2"]))
        assert exc.value.row == 3

    def test_non_numeric_coordinate(self):
        with pytest.raises(ParseError) as exc:
            ingest_csv(csv_bytes(["oops,1,0"]))
        assert exc.value.row == 2

    def test_missing_column(self):
        with pytest.raises(ParseError):
            ingest_csv(csv_bytes(["1,0"]))

    def test_bad_header(self):
        with pytest.raises(ParseError) as exc:
            ingest_csv(csv_bytes(["1,2,0"], header="a,b,c"))
        assert exc.value.row == 1

    def test_non_finite_coordinate(self):
        with pytest.raises(ParseError):
            ingest_csv(csv_bytes(["inf,0,1"]))

    def test_round_trip_reproduces_counts_and_order(self, small_dataset):
        buf = io.StringIO()
        small_dataset.to_csv(buf)
        again = ingest_csv(buf.getvalue())
        assert again.n_total == small_dataset.n_total
        assert again.ones_total == small_dataset.ones_total
        assert np.array_equal(again.xs, small_dataset.xs)
        assert np.array_equal(again.ys, small_dataset.ys)
        assert np.array_equal(again.labels, small_dataset.labels)


class TestLabeledPoint:
    def test_rejects_bad_label(self):
        with pytest.raises(ValueError):
            LabeledPoint(0.0, 0.0, 2)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            LabeledPoint(float("nan"), 0.0, 1)


class TestOrderStat:
    def test_r_equal_one_is_minimum(self, small_dataset):
        assert order_stat_x(small_dataset, 1) == small_dataset.xs[0]

    def test_clamped_above_to_maximum(self, small_dataset):
        n = small_dataset.n_total
        assert order_stat_x(small_dataset, n + 7.3) == small_dataset.xs[-1]

    def test_round_half_up(self):
        values = np.array([10.0, 20.0, 30.0, 40.0, 50.0])
        assert order_stat(values, 2.5) == 30.0   # half rounds up
        assert order_stat(values, 2.4) == 20.0

    def test_clamped_below(self, small_dataset):
        assert order_stat_x(small_dataset, -3.7) == small_dataset.xs[0]

    def test_nondecreasing_in_r(self, small_dataset):
        rs = np.linspace(-2, small_dataset.n_total + 2, 101)
        vals = [order_stat_x(small_dataset, r) for r in rs]
        assert all(a <= b for a, b in zip(vals, vals[1:]))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            order_stat(np.array([]), 1.0)


def test_label_permutation_preserves_geometry(small_dataset):
    rng = np.random.default_rng(0)
    perm = rng.permutation(small_dataset.n_total)
    permuted = small_dataset.with_labels(small_dataset.labels[perm])
    assert np.array_equal(permuted.xs, small_dataset.xs)
    assert np.array_equal(permuted.ys, small_dataset.ys)
    assert permuted.ones_total == small_dataset.ones_total
