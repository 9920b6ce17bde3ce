"""The invariant measure on the Cantor set and Birkhoff cross-checks."""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction

import gmpy2

from .adic import build_diagram, eta, minimal_infinite_path, vershik_successor
from .covers import Cover, Floor, build_cover, tower_height, tower_range
from .errors import DomainError
from .kneading import cutting_time, orbit_order
from .rigorous import RInterval
from .tent import TentSystem, shadow_orbit


def _poly(d: int, x: RInterval) -> RInterval:
    return x ** d - x ** (d - 1) - 1


def perron_root(d: int, bits: int = 128) -> RInterval:
    """Enclosure of the largest root of x^d - x^(d-1) - 1, width <= 2^-bits."""
    if d < 2:
        raise DomainError("d must be >= 2")
    if bits < 16:
        raise DomainError("bits must be >= 16")
    prec = bits + 32
    lo, hi = gmpy2.mpfr(1, prec), gmpy2.mpfr(2, prec)
    c = gmpy2.context(precision=prec)
    eps = gmpy2.mpfr(2, prec) ** (-bits)
    # p < 0 on (1, beta) and p > 0 beyond, since p is increasing past (d-1)/d
    while c.sub(hi, lo) > eps:
        mid = c.div(c.add(lo, hi), 2)
        s = _poly(d, RInterval.point(mid, prec)).sign()
        if s < 0:
            lo = mid
        elif s > 0:
            hi = mid
        else:
            break
    root = RInterval(lo, hi, prec)
    if not (_poly(d, RInterval.point(lo, prec)).sign() <= 0
            and _poly(d, RInterval.point(hi, prec)).sign() > 0):
        raise ArithmeticError("sign change not certified")
    return root


@dataclass
class MeasureTable:
    d: int
    beta: RInterval
    prec: int

    def __post_init__(self):
        self._inv = RInterval(1, 1, self.prec) / self.beta
        self._pow: dict[int, RInterval] = {0: RInterval(1, 1, self.prec)}

    def inv_power(self, n: int) -> RInterval:
        """Enclosure of beta^-n."""
        if n not in self._pow:
            self._pow[n] = self._inv ** n
        return self._pow[n]


def measure_table(d: int, bits: int = 128) -> MeasureTable:
    return MeasureTable(d, perron_root(d, bits), bits + 32)


def _check_k(t: MeasureTable, k: int, least: int) -> None:
    if k < least:
        raise DomainError(f"k must be >= {least} for d={t.d}")


def cylinder_measure(t: MeasureTable, k: int, ell: int) -> RInterval:
    _check_k(t, k, t.d - 1)
    if not 1 <= ell <= t.d:
        raise DomainError(f"ell must lie in [1, {t.d}]")
    return t.inv_power(k + ell - 1)


def _exponent(t: MeasureTable, k: int, i: int) -> int:
    if i not in tower_range(t.d, k):
        raise DomainError(f"tower {i} does not exist at level {k}")
    return k if i == 1 else k + i - 1


def tower_measure(t: MeasureTable, k: int, i: int) -> RInterval:
    _check_k(t, k, t.d - 1)
    return t.inv_power(_exponent(t, k, i)) * tower_height(t.d, i, k)


def floor_measure(t: MeasureTable, k: int, i: int) -> RInterval:
    _check_k(t, k, 2 * t.d - 1)
    return t.inv_power(_exponent(t, k, i))


def total_measure(t: MeasureTable, k: int) -> RInterval:
    """Sum of the tower measures at level k; should enclose 1."""
    out = RInterval(0, 0, t.prec)
    for i in tower_range(t.d, k):
        out = out + tower_measure(t, k, i)
    return out


def normalization_check(t: MeasureTable, k: int, width_bits: int = 40) -> dict:
    s = total_measure(t, k)
    ok = s.contains(1) and s.width() <= gmpy2.mpfr(2) ** (-width_bits)
    return {"d": t.d, "k": k, "sum": s, "passed": bool(ok)}


def perron_witness(t: MeasureTable) -> bool:
    """F_d w = beta w for w = (1, beta^-1, ..., beta^-(d-1)), within enclosure."""
    d = t.d
    w = [t.inv_power(j) for j in range(d)]
    Fw = [w[0] + w[d - 1]] + [w[r - 1] for r in range(1, d)]
    return all((Fw[r] - t.beta * w[r]).contains_zero() for r in range(d))


# ---------------------------------------------------------------------------
# Birkhoff frequencies

def _side(n: int, x: RInterval, m: int, y: RInterval, d: int) -> tuple[int, bool]:
    """Order of c_n against c_m; the flag says the enclosures could not decide."""
    if n == m:
        return 0, False
    if x.precedes(y):
        return -1, False
    if y.precedes(x):
        return 1, False
    return orbit_order(d, n, m), True


class _TowerIndex:
    """Floors of one tower sorted by left end."""

    def __init__(self, floors: list[Floor]):
        self.floors = sorted(floors, key=lambda f: f.lo.lo)
        self.keys = [f.lo.lo for f in self.floors]
        self.reach = []
        top = None
        for f in self.floors:
            top = f.hi.hi if top is None else max(top, f.hi.hi)
            self.reach.append(top)

    def classify(self, n: int, x: RInterval, d: int) -> tuple[bool, bool]:
        """(member, needed the exact itinerary comparison)."""
        hard = False
        stop = bisect_right(self.keys, x.hi)
        for pos in range(stop - 1, -1, -1):
            if self.reach[pos] < x.lo:
                break
            f = self.floors[pos]
            s0, h0 = _side(n, x, f.left, f.lo, d)
            if s0 < 0:
                hard |= h0
                continue
            s1, h1 = _side(n, x, f.right, f.hi, d)
            hard |= h0 or h1
            if s1 <= 0:
                return True, hard
        # a left end sharing the index may sort just after x.hi
        for f in self.floors[stop:]:
            if f.lo.lo > x.hi:
                break
            if f.left == n:
                return True, hard
        return False, hard


@dataclass
class BirkhoffRow:
    tower: int
    visits: int
    n_iter: int
    expected: RInterval
    ambiguous: int        # enclosures overlapped an endpoint; settled by itineraries
    unresolved: int = 0   # never settled; counted as an interval of frequencies

    @property
    def frequency(self) -> Fraction:
        return Fraction(self.visits, self.n_iter)

    @property
    def frequency_range(self) -> tuple[Fraction, Fraction]:
        return (Fraction(self.visits, self.n_iter),
                Fraction(self.visits + self.unresolved, self.n_iter))

    @property
    def relative_error(self) -> float:
        e = float(self.expected.mid())
        return abs(float(self.frequency) - e) / e


def birkhoff_table(sys: TentSystem, k: int, n_iter: int, prec: int = 256,
                   table: MeasureTable | None = None) -> list[BirkhoffRow]:
    """Visit frequencies of c_1..c_n_iter to every tower of the level-k cover.

    Towers are counted independently, since floors of different towers may
    overlap.  Orbit points come from the close-return shadow, so the system
    must be solved for a prefix of at least n_iter.
    """
    d = sys.d
    cover = build_cover(sys, k)
    table = table or measure_table(d)
    idx = {i: _TowerIndex(t.floors) for i, t in cover.towers.items()}
    visits = {i: 0 for i in idx}
    hard = {i: 0 for i in idx}
    for n, x in shadow_orbit(sys, n_iter, prec):
        for i, ti in idx.items():
            inside, h = ti.classify(n, x, d)
            visits[i] += inside
            hard[i] += h
    return [BirkhoffRow(i, visits[i], n_iter, tower_measure(table, k, i), hard[i])
            for i in idx]


def birkhoff_frequency(sys: TentSystem, cover: Cover, i: int, n_iter: int,
                       prec: int = 256) -> BirkhoffRow:
    d = sys.d
    if i not in cover.towers:
        raise DomainError(f"tower {i} not in the cover")
    ti = _TowerIndex(cover.towers[i].floors)
    visits = hard = 0
    for n, x in shadow_orbit(sys, n_iter, prec):
        inside, h = ti.classify(n, x, d)
        visits += inside
        hard += h
    expected = tower_measure(measure_table(d), cover.k, i)
    return BirkhoffRow(i, visits, n_iter, expected, hard)


def coded_birkhoff_table(sys: TentSystem, k: int, n_iter: int, prec: int = 256,
                         table: MeasureTable | None = None) -> dict:
    """Tower frequencies read from the adic address of c_n.

    c_n is assigned to the floor eta of tower i given by the level-k
    truncation of V^n(x_min), and membership of c_n in that floor is
    certified.  Each point lands in exactly one tower, so these frequencies
    estimate the cylinder measures even where interval floors overlap.
    """
    d = sys.d
    cover = build_cover(sys, k)
    table = table or measure_table(d)
    K = max(k, d)
    while cutting_time(d, K - d + 1) <= n_iter:
        K += 1
    diag = build_diagram(d, K)
    x = minimal_infinite_path(K)
    visits = {i: 0 for i in cover.towers}
    failures = []
    hard = 0
    for n, pt in shadow_orbit(sys, n_iter, prec):
        x = vershik_successor(diag, x)
        head = x.prefix[:k + 1]
        i = head[-1]
        f = cover.towers[i].floors[eta(d, head)]
        s0, h0 = _side(n, pt, f.left, f.lo, d)
        s1, h1 = _side(n, pt, f.right, f.hi, d)
        hard += h0 or h1
        if s0 < 0 or s1 > 0:
            failures.append(n)
        visits[i] += 1
    rows = [BirkhoffRow(i, visits[i], n_iter, tower_measure(table, k, i), 0)
            for i in cover.towers]
    return {"rows": rows, "membership_failures": failures[:10],
            "certified": not failures, "ambiguous": hard}
