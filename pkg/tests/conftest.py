import numpy as np
import pytest

from cellwatch.mobility import VisitMatrix
from cellwatch.topology import Box, generate_topology


@pytest.fixture(scope="session")
def small_topology():
    return generate_topology(12, Box(0.0, 10.0, 0.0, 10.0), rng_seed=3)


def visits_from_rows(rows, horizon=1.0):
    return VisitMatrix(t=np.asarray(rows, dtype=np.float64), horizon=horizon)


@pytest.fixture()
def toy_visits():
    # 5 users x 4 sites, rows sum to 1.
    return visits_from_rows(
        [
            [0.70, 0.30, 0.00, 0.00],
            [0.10, 0.60, 0.30, 0.00],
            [0.00, 0.00, 0.50, 0.50],
            [0.25, 0.25, 0.25, 0.25],
            [0.00, 0.90, 0.05, 0.05],
        ]
    )
