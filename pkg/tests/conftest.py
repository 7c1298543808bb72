"""
Shared fixtures for the costbisim tests.
"""

import random
from fractions import Fraction

import pytest

import costbisim
from costbisim.config import (
    DEFAULT_ALGORITHM,
    DEFAULT_ENUMERATION_DEPTH,
    DEFAULT_LEVEL,
    MIN_SIZE_FOR_COMPRESSION,
)

from .models import direct_or_detour, icc, wcc


@pytest.fixture(autouse=True)
def reset_config_after_test():
    """Run each test single-threaded and reset configuration afterwards."""
    costbisim.configure(threads=1)
    yield
    costbisim.configure(
        threads=1,
        algorithm=DEFAULT_ALGORITHM,
        level=DEFAULT_LEVEL,
        min_size=MIN_SIZE_FOR_COMPRESSION,
        enumeration_depth=DEFAULT_ENUMERATION_DEPTH,
        lp_self_check=True,
    )


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture
def a23():
    """Two hops at distance 3: hop cost 9."""
    return wcc(2, 3, Fraction(1, 2), name="A23")


@pytest.fixture
def a32():
    """Three hops at distance 2: hop cost 4."""
    return wcc(3, 2, Fraction(1, 2), name="A32", prefix="k")


@pytest.fixture
def lossy():
    """Two hops of cost 25 succeeding with probability 3/4."""
    return wcc(2, 5, Fraction(3, 4), name="W")


@pytest.fixture
def ideal():
    return icc()


@pytest.fixture
def detour():
    return direct_or_detour()
