"""
Shared fixtures for the mirror-reparam test suite
"""

import numpy as np
import pytest

from services.geometry_service import GeometryService


@pytest.fixture
def eg_pair():
    return GeometryService.build_pair("eg", 2, 1e-3)


@pytest.fixture
def logbarrier_pair():
    return GeometryService.build_pair("logbarrier", 2, 1e-2)


@pytest.fixture
def tempered_pair():
    return GeometryService.build_pair("tempered", 2, tau=0.5, p=2.0)


@pytest.fixture
def euclid_pair():
    return GeometryService.build_pair("euclid", 2, 1e-3)


@pytest.fixture
def all_pairs(eg_pair, logbarrier_pair, tempered_pair, euclid_pair):
    return [eg_pair, logbarrier_pair, tempered_pair, euclid_pair]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
