import time

import numpy as np
import pytest

from steplab import experiments


def dense_laplacian(m):
    """Independent dense assembly of the scaled five-point operator."""
    xi = 1.0 / (m + 1)
    t = 2.0 * np.eye(m) - np.eye(m, k=1) - np.eye(m, k=-1)
    return (np.kron(np.eye(m), t) + np.kron(t, np.eye(m))) / xi**2


def as_dense(op):
    """Materialize a matrix-free operator column by column."""
    eye = np.eye(op.dim)
    return np.column_stack([op(eye[:, i]) for i in range(op.dim)])


@pytest.fixture(scope="session")
def compare_m63():
    """The four-method comparison run on the m = 63 Poisson objective."""
    t0 = time.perf_counter()
    traces = experiments.run_compare(experiments.default_spec("fig_compare"))
    return traces, time.perf_counter() - t0


@pytest.fixture(scope="session")
def table1():
    t0 = time.perf_counter()
    rows = experiments.run_table1(experiments.default_spec("table1"))
    return rows, time.perf_counter() - t0


@pytest.fixture(scope="session")
def search_report():
    return experiments.run_midpoint_search(experiments.default_spec("midpoint_search"))
