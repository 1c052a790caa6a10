import numpy as np
import pytest

from core.multiply import MultiplyConfig


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def small_cfg():
    """Strassen enabled from order 8 on leaves of order 4"""
    return MultiplyConfig(strassen_min_order=8, density_boundary=0.3)
