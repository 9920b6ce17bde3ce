from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from fibtower.covers import (base_indices, base_interval_J, build_cover, floor_inside,
                             interval_I, interval_I_indices, parent_floor, tower_height,
                             tower_range, verify_split_lemma, verify_theorem_1_1)
from fibtower.kneading import cutting_time
from fibtower.tent import orbit_point

from conftest import cover_system


def test_interval_I_examples(sys2, sys3):
    assert interval_I_indices(2, 0) == (2, 1)
    for k in (2, 4, 6):
        assert set(interval_I_indices(2, k)) == {cutting_time(2, k), cutting_time(2, k + 1)}
    for k in (1, 4, 7):
        assert set(interval_I_indices(3, k)) == {cutting_time(3, k), cutting_time(3, k + 3)}
    assert interval_I(sys2, 5).contains_zero()


def test_base_interval_examples(sys2, sys3):
    assert set(base_indices(2, 2, 1)) == {4, 1}
    J = base_interval_J(sys2, 1, 4)
    I = interval_I(sys2, 4)
    assert J.lo == I.lo and J.hi == I.hi
    for k in range(1, 10):
        assert base_indices(3, 3, k) == base_indices(3, 2, k + 1)


def test_cover_examples(sys2, sys3):
    c0 = build_cover(sys2, 0)
    assert list(c0.towers) == [1] and c0.towers[1].height == 1
    assert {c0.towers[1].base.left, c0.towers[1].base.right} == {1, 2}
    c = build_cover(sys3, 2)
    assert sorted(c.towers) == [1, 2, 3]
    assert all(t.height == 1 for t in c.towers.values())
    c5 = build_cover(sys2, 5)
    assert (c5.towers[1].height, c5.towers[2].height) == (8, 5)
    assert c5.floor_count() == 13


@given(st.integers(2, 6), st.integers(0, 40))
def test_heights_add_up(d, k):
    if k >= d - 1:
        assert sum(tower_height(d, i, k) for i in tower_range(d, k)) == cutting_time(d, k)


@given(st.integers(2, 5), st.integers(0, 30))
def test_central_stacking(d, k):
    if k >= 2 * d - 1:
        assert tower_height(d, 1, k + 1) == tower_height(d, 1, k) + tower_height(d, 2, k)


def test_floors_follow_the_map(sys2):
    cover = build_cover(sys2, 7)
    for t in cover.towers.values():
        for f in t.floors[1:]:
            assert f.lo.width() < 1e-30
    # endpoints are the orbit points they claim to be
    for _, _, f in cover.all_floors():
        assert f.lo.lo == orbit_point(sys2, f.left).lo


@pytest.mark.parametrize("d,kmax", [(2, 10), (3, 12)])
def test_theorem_1_1(d, kmax):
    rep = verify_theorem_1_1(cover_system(d, kmax), kmax)
    assert rep.passed, rep.failures()[:3]


def test_disjointness_not_asserted_below_threshold():
    d = 4
    rep = verify_theorem_1_1(cover_system(d, 6), 6)
    assert rep.passed
    assert all(c["status"] == "not applicable"
               for c in rep.checks if c["check"] == "disjoint")


def test_zero_nesting(sys2):
    c0, c1 = build_cover(sys2, 0), build_cover(sys2, 1)
    outer = c0.towers[1].base
    assert all(floor_inside(f, outer) for _, _, f in c1.all_floors())


def test_unique_parent(sys2):
    for k in range(1, 9):
        lo, hi = build_cover(sys2, k), build_cover(sys2, k + 1)
        floors = list(lo.all_floors())
        for i, n, f in hi.all_floors():
            holders = [(j, m) for j, m, g in floors if floor_inside(f, g)]
            assert holders == [parent_floor(2, i, k, n)]


def test_split_lemma_examples(sys2, sys3):
    r = verify_split_lemma(sys2, 3)
    assert r["inside"] and r["disjoint"]
    r = verify_split_lemma(sys3, 1)
    assert r["inside"] and "disjoint" not in r
    assert verify_split_lemma(sys2, 0)["inside"]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10))
def test_split_lemma_range(k):
    assert verify_split_lemma(cover_system(2, 12), k)["passed"]
