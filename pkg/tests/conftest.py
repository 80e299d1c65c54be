from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from classgaze.metrics import GazeDistribution, GazePoint

FIXTURE_DIR = Path(__file__).parent / "fixtures"


def dist_from_xy(xy, token: str = "t") -> GazeDistribution:
    """Wrap an (n, 2) array as a single-window distribution."""
    xy = np.asarray(xy, dtype=np.float64)
    pts = [GazePoint(token, 0.0, float(x), float(y)) for x, y in xy]
    return GazeDistribution(pts, 0.0, 1.0)


def blob(gen: np.random.Generator, n: int, center, sigma: float) -> np.ndarray:
    return np.asarray(center, dtype=np.float64) + gen.standard_normal((n, 2)) * sigma


@pytest.fixture
def gen():
    return np.random.Generator(np.random.Philox(20240901))
