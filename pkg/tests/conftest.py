import random

import pytest

from nesykc import use_backend
from nesykc._backend import BACKENDS


@pytest.fixture(params=BACKENDS)
def backend(request):
    with use_backend(request.param):
        yield request.param


@pytest.fixture
def rng():
    return random.Random(20240611)
