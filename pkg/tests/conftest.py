from __future__ import annotations

import functools

import pytest

from fibtower.covers import max_orbit_index
from fibtower.tent import system_for


@functools.lru_cache(maxsize=None)
def cover_system(d: int, kmax: int):
    """A solved system good for covers up to level kmax + 1."""
    return system_for(d, max_orbit_index(d, kmax + 1))


@functools.lru_cache(maxsize=None)
def orbit_system(d: int, n: int):
    return system_for(d, n)


@pytest.fixture(scope="session")
def sys2():
    return cover_system(2, 12)


@pytest.fixture(scope="session")
def sys3():
    return cover_system(3, 14)
