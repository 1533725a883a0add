import io

import numpy as np
import pytest

from blockscan.model import Dataset
from blockscan.statistic import Counts


@pytest.fixture
def small_dataset():
    rng = np.random.default_rng(42)
    n = 150
    labels = (rng.random(n) < 0.4).astype(int)
    return Dataset.from_points(rng.random(n) * 10, rng.random(n) * 10, labels)


def make_dataset(n, seed, p=0.4, spread=10.0):
    rng = np.random.default_rng(seed)
    labels = (rng.random(n) < p).astype(int)
    if labels.sum() in (0, n):
        labels[0] = 1 - labels[0]
    return Dataset.from_points(rng.random(n) * spread, rng.random(n) * spread, labels)


def recount(dataset, x_lo, x_hi, y_lo, y_hi) -> Counts:
    """Direct O(N) membership count over the closed coordinate box."""
    inside = ((dataset.xs >= x_lo) & (dataset.xs <= x_hi)
              & (dataset.ys >= y_lo) & (dataset.ys <= y_hi))
    return Counts(int(inside.sum()), int(dataset.labels[inside].sum()),
                  dataset.n_total, dataset.ones_total)


def csv_bytes(rows, header="x,y,label"):
    text = header + "\n" + "\n".join(rows) + ("\n" if rows else "")
    return io.BytesIO(text.encode("utf-8"))
