"""Shared fixtures: forms and zero sets are expensive, so they are computed
once per session and shared across test modules."""

import pytest

from modzero.eigen import eigenform, eisenstein_form
from modzero.zerofind import zeros_in_F

_zero_cache = {}


def cached_zeros(form):
    key = (form.weight, form.kind, form.eigen_index)
    if key not in _zero_cache:
        _zero_cache[key] = zeros_in_F(form)
    return _zero_cache[key]


@pytest.fixture(scope="session")
def delta():
    return eigenform(12, 0)


@pytest.fixture(scope="session")
def e4():
    return eisenstein_form(4)


@pytest.fixture(scope="session")
def e6():
    return eisenstein_form(6)


@pytest.fixture(scope="session")
def eig24_0():
    return eigenform(24, 0)


@pytest.fixture(scope="session")
def eig24_1():
    return eigenform(24, 1)
