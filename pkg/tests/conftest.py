import math
from pathlib import Path

import numpy as np
import pytest

from core.fields import BoxDomain, Geometry, Grid
from core.regions import RegionParams

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def hyperbolic_box():
    return BoxDomain((0.0, 1.0), (1.0, 2.0), Geometry.HYPERBOLIC)


@pytest.fixture
def spherical_box():
    return BoxDomain((-1.0, -1.0), (1.0, 1.0), Geometry.SPHERICAL)


@pytest.fixture
def hyperbolic_grid(hyperbolic_box):
    return Grid(hyperbolic_box, (16, 16))


@pytest.fixture
def spherical_grid(spherical_box):
    return Grid(spherical_box, (16, 16))


@pytest.fixture
def hyperbolic_params():
    """n=2 on (0,1)x(1,2)"""
    return RegionParams(n=2, m=1.0, M=2.0)


@pytest.fixture
def spherical_params():
    return RegionParams(n=2, m=0.0, M=math.sqrt(2.0))


@pytest.fixture
def config_dir():
    return CONFIG_DIR
