from __future__ import annotations

import gmpy2
import pytest
from hypothesis import given, strategies as st

from fibtower.adic import AdicContext, enumerate_paths, eta
from fibtower.covers import build_cover, tower_range
from fibtower.errors import DomainError
from fibtower.measure import (birkhoff_frequency, birkhoff_table, coded_birkhoff_table,
                              cylinder_measure, floor_measure, measure_table,
                              normalization_check, perron_root, perron_witness,
                              total_measure, tower_measure)

import oracles
from conftest import orbit_system

with gmpy2.context(gmpy2.get_context(), precision=200):
    PHI = (1 + gmpy2.sqrt(gmpy2.mpfr(5))) / 2


def test_perron_root_examples():
    assert perron_root(2, 100).contains(PHI)
    b3 = perron_root(3, 100)
    assert abs(float(b3.mid()) - 1.4655712319) < 1e-9
    for d in range(2, 7):
        ref = oracles.perron_root(d)
        r = perron_root(d, 120)
        with gmpy2.context(gmpy2.get_context(), precision=300):
            eps = gmpy2.mpfr(2) ** -150
            assert r.lo - eps <= ref <= r.hi + eps
        assert r.width() <= gmpy2.mpfr(2) ** -120
        assert 1 < r.lo and r.hi < 2


def test_perron_root_domain():
    with pytest.raises(DomainError):
        perron_root(1, 64)
    with pytest.raises(DomainError):
        perron_root(2, 8)


def test_cylinder_examples():
    t = measure_table(2)
    assert abs(float(cylinder_measure(t, 3, 1).mid()) - 0.2360679) < 1e-7
    assert abs(float(cylinder_measure(t, 3, 2).mid()) - 0.1458980) < 1e-7
    for d in range(2, 6):
        td = measure_table(d)
        s = sum((cylinder_measure(td, d - 1, l) for l in range(1, d + 1)),
                start=cylinder_measure(td, d - 1, 1) * 0)
        assert s.contains(1)


def test_tower_examples():
    t = measure_table(2)
    m1, m2 = tower_measure(t, 3, 1), tower_measure(t, 3, 2)
    assert abs(float(m1.mid()) - 0.708) < 1e-3 and abs(float(m2.mid()) - 0.292) < 1e-3
    assert (m1 + m2).contains(1)
    t3 = measure_table(3)
    assert total_measure(t3, 6).contains(1)
    for d in range(2, 6):
        td = measure_table(d)
        for i in tower_range(d, d - 1):
            assert tower_measure(td, d - 1, i).overlaps(floor_measure_any(td, d - 1, i))


def floor_measure_any(t, k, i):
    return t.inv_power(k if i == 1 else k + i - 1)


def test_floor_examples():
    t = measure_table(2)
    assert floor_measure(t, 3, 1).overlaps(cylinder_measure(t, 3, 1))
    t3 = measure_table(3)
    assert floor_measure(t3, 5, 3).overlaps(t3.inv_power(7))
    with pytest.raises(DomainError):
        floor_measure(t3, 4, 1)


def test_normalization_range():
    for d in range(2, 6):
        t = measure_table(d)
        for k in range(d - 1, 2 * d + 11):
            assert normalization_check(t, k)["passed"]


@given(st.integers(2, 5), st.integers(0, 30), st.data())
def test_height_times_floor(d, extra, data):
    t = measure_table(d)
    k = 2 * d - 1 + extra
    i = data.draw(st.sampled_from(tower_range(d, k)))
    from fibtower.covers import tower_height
    assert tower_measure(t, k, i).overlaps(floor_measure(t, k, i) * tower_height(d, i, k))


@given(st.integers(2, 5), st.integers(0, 30), st.data())
def test_stationarity(d, extra, data):
    t = measure_table(d)
    k = d - 1 + extra
    l = data.draw(st.integers(1, d))
    assert (cylinder_measure(t, k + 1, l) * t.beta).overlaps(cylinder_measure(t, k, l))


def test_perron_witness():
    assert all(perron_witness(measure_table(d)) for d in range(2, 7))


def test_pushforward_consistency():
    d, k = 2, 5
    t = measure_table(d)
    ctx = AdicContext(orbit_system(d, 200), k)
    for p in enumerate_paths(d, k):
        fl = ctx.project(p)
        i = p[-1]
        assert cylinder_measure(t, k, i).overlaps(floor_measure(t, k, i))
        assert ctx.cover.towers[i].floors[eta(d, p)] is fl


def test_birkhoff_d2_small():
    s = orbit_system(2, 20001)
    rows = birkhoff_table(s, 4, 20000)
    assert sum(r.visits for r in rows) == 20000
    for r in rows:
        assert r.relative_error < 0.01 and r.unresolved == 0
    one = birkhoff_frequency(s, build_cover(s, 4), 1, 20000)
    assert one.visits == rows[0].visits


def test_coded_birkhoff_d3_small():
    s = orbit_system(3, 20001)
    out = coded_birkhoff_table(s, 5, 20000)
    assert out["certified"]
    assert sum(r.visits for r in out["rows"]) == 20000
    assert all(r.relative_error < 0.02 for r in out["rows"])


def test_interval_counts_overlap_for_d3():
    # top floors of different towers share points of the Cantor set here
    s = orbit_system(3, 20001)
    rows = birkhoff_table(s, 5, 20000)
    assert sum(r.visits for r in rows) > 20000
