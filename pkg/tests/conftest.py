import numpy as np
import pytest

from tdxray.fields import default_slice_field
from tdxray.geometry import ball


@pytest.fixture(scope="session")
def unit_disk():
    return ball()


@pytest.fixture(scope="session")
def slice_field():
    return default_slice_field()


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
