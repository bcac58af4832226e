import numpy as np
import pytest
from hypothesis import settings

from hashloop.kernels import default_backend, set_backend

settings.register_profile("suite", deadline=None, max_examples=60,
                          derandomize=True)
settings.load_profile("suite")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["numba", "numpy"])
def each_backend(request):
    """Run the test once per kernel backend, restoring the default after."""
    set_backend(request.param)
    yield request.param
    set_backend(default_backend())


@pytest.fixture
def numpy_backend():
    set_backend("numpy")
    yield
    set_backend(default_backend())
