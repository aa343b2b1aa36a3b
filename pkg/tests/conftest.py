import csv

import numpy as np
import pytest


@pytest.fixture(scope="session")
def digits_csv(tmp_path_factory):
    """Digits CSV fixture (64 pixel columns + label) from scikit-learn's
    bundled copy of the NIST-derived dataset; no network access needed."""
    sklearn_datasets = pytest.importorskip("sklearn.datasets")
    data = sklearn_datasets.load_digits()
    path = tmp_path_factory.mktemp("digits") / "digits.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row, label in zip(data.data, data.target):
            writer.writerow([int(v) for v in row] + [int(label)])
    return path


@pytest.fixture()
def rng():
    return np.random.Generator(np.random.Philox(20260809))
