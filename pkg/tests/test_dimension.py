from __future__ import annotations

from fractions import Fraction

import pytest

from fibtower.covers import build_cover
from fibtower.dimension import (d_length, delta_direct, delta_formula, diameter_product,
                                dimension_series, dimension_system, floor_length_formulas,
                                hausdorff_sum, recurrence_exponent, tent_identity)
from fibtower.kneading import cutting_time
from fibtower.tent import orbit_point

from conftest import cover_system


@pytest.fixture(scope="module")
def dsys2():
    return dimension_system(2, 18)


@pytest.fixture(scope="module")
def dsys3():
    return dimension_system(3, 18)


def test_d_length_examples(dsys2, dsys3):
    for s in (dsys2, dsys3):
        ls = [d_length(s, k) for k in range(1, 18)]
        assert all(b.precedes(a) for a, b in zip(ls, ls[1:]))
        assert orbit_point(s, 2).negative()
        assert d_length(s, 1).overlaps(abs(orbit_point(s, 2)))


@pytest.mark.parametrize("d", [2, 3])
def test_tent_identity(d, dsys2, dsys3):
    s = dsys2 if d == 2 else dsys3
    for k in range(d, 17):
        assert tent_identity(s, k)


def test_ratio_above_one(dsys2):
    for k in range(1, 17):
        r = d_length(dsys2, k) / d_length(dsys2, k + 1)
        assert r.lo > 1


def test_delta_direct_dominates_base():
    s = cover_system(2, 12)
    for k in range(1, 11):
        direct, _ = delta_direct(s, k)
        base = build_cover(s, k).towers[1].base.length()
        assert direct.hi >= base.lo


def test_delta_formula_matches_direct():
    s = cover_system(2, 12)
    for k in range(2, 12):
        direct, where = delta_direct(s, k)
        assert direct.overlaps(delta_formula(s, k))


def test_delta_monotone(dsys2):
    ds = [delta_formula(dsys2, k) for k in range(2, 18)]
    assert all(b.precedes(a) for a, b in zip(ds, ds[1:]))


@pytest.mark.parametrize("d", [2, 3])
def test_floor_length_formulas(d):
    s = cover_system(d, 12)
    for k in range(1, 11):
        assert floor_length_formulas(s, k)


def test_diameter_product(dsys2):
    P = [diameter_product(dsys2, k) for k in range(1, 17)]
    assert all(p.positive() for p in P)
    gaps = [abs(b - a).hi for a, b in zip(P, P[1:])]
    # differences shrink until they reach the 512-bit resolution
    live = [g for g in gaps if g > 1e-140]
    assert len(live) >= 8
    assert all(y < x for x, y in zip(live, live[1:]))


def test_hausdorff_sum_examples(dsys2):
    assert [int(hausdorff_sum(dsys2, k, 0).lo) for k in range(1, 8)] == \
        [cutting_time(2, k) for k in range(1, 8)]
    a = Fraction(1, 10)
    tail = [hausdorff_sum(dsys2, k, a) for k in range(8, 18)]
    assert all(b.precedes(x) for x, b in zip(tail, tail[1:]))


def test_recurrence_positive(dsys2):
    rows = recurrence_exponent(dsys2, 18)
    assert all(r["exponent"] > 0 for r in rows)
    assert 0.8 < rows[-1]["exponent"] < 1.0


def test_series_report(dsys3):
    ser = dimension_series(dsys3, 18, direct_kmax=10)
    assert ser.delta_threshold is not None and ser.delta_threshold <= 10
    assert ser.product_k0 is not None
    assert all(k is not None for k in ser.hsum_k0.values())
