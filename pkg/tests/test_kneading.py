from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from fibtower.errors import DomainError
from fibtower.kneading import (Combinatorics, cutting_time, cutting_times,
                               cutting_times_from_itinerary, kneading_map,
                               kneading_sequence, orbit_order, verify_sum_identity)

import oracles

K2 = "100111011001010011100"
K3 = "100011101100110001010"
K4 = "100001110110011000110"


def test_cutting_time_examples():
    assert cutting_times(2, 6) == [1, 2, 3, 5, 8, 13, 21]
    assert cutting_time(2, -2) == 0 and cutting_time(2, -1) == 1
    assert cutting_times(3, 7) == [1, 2, 3, 4, 6, 9, 13, 19]


def test_extended_values():
    for d in range(2, 7):
        for j in range(-3 * d + 3, -2 * d + 1):
            assert cutting_time(d, j) == 0
        assert cutting_time(d, -2 * d + 1) == 1
        assert cutting_time(d, -2 * d + 2) == 0
        for k in range(-2 * d + 3, 61):
            assert cutting_time(d, k) == cutting_time(d, k - 1) + cutting_time(d, k - d)


def test_out_of_range_index():
    with pytest.raises(DomainError):
        cutting_time(2, -4)
    with pytest.raises(DomainError):
        cutting_time(1, 3)


def test_against_plain_recursion():
    for d in range(2, 7):
        assert cutting_times(d, 60) == oracles.cutting_times(d, 60)


def test_kneading_map():
    assert kneading_map(2, 1) == 0
    assert kneading_map(2, 5) == 3
    assert kneading_map(4, 4) == 0


def test_kneading_prefixes():
    assert kneading_sequence(2, 21) == K2
    assert kneading_sequence(3, 21) == K3
    assert kneading_sequence(4, 21) == K4


def test_kneading_matches_block_oracle():
    for d in range(2, 7):
        assert kneading_sequence(d, 5000) == oracles.kneading(d, 5000)


@pytest.mark.parametrize("d", range(2, 7))
def test_kneading_starts_with_one_then_zeros(d):
    assert kneading_sequence(d, d + 1) == "1" + "0" * d


def test_cutting_times_from_itinerary_examples():
    assert cutting_times_from_itinerary(K2) == [1, 2, 3, 5, 8, 13, 21]
    assert cutting_times_from_itinerary("10") == [1, 2]
    assert cutting_times_from_itinerary(K3[:19]) == [1, 2, 3, 4, 6, 9, 13, 19]


@pytest.mark.parametrize("d", range(2, 7))
def test_round_trip(d):
    for K in range(1, 16):
        seq = kneading_sequence(d, cutting_time(d, K))
        assert cutting_times_from_itinerary(seq) == cutting_times(d, K)


def test_sum_identity_examples():
    assert verify_sum_identity(2, 0)
    assert verify_sum_identity(3, 4)
    assert verify_sum_identity(2, 5)


def test_sum_identity_range():
    assert all(verify_sum_identity(d, j) for d in range(2, 7) for j in range(61))


@given(st.integers(2, 6), st.integers(1, 60))
def test_recursion_with_kneading_map(d, k):
    assert cutting_time(d, k) == cutting_time(d, k - 1) + cutting_time(d, kneading_map(d, k))
    assert cutting_time(d, k) > cutting_time(d, k - 1)


@given(st.integers(2, 6), st.integers(0, 40))
def test_heights_sum_to_cutting_time(d, k):
    if k < d - 1:
        return
    C = Combinatorics(d)
    towers = [1] + list(range(max(d - k + 1, 2), d + 1))
    assert sum(C.height(i, k) for i in towers) == cutting_time(d, k)


@given(st.integers(2, 4), st.integers(1, 400), st.integers(1, 400))
def test_orbit_order_is_antisymmetric(d, m, n):
    assert orbit_order(d, m, n) == -orbit_order(d, n, m)
    assert (orbit_order(d, m, n) == 0) == (m == n)
