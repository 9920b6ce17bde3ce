"""Tower covers M_{d,k} of the critical omega-limit set.

Every floor endpoint is a point of the critical orbit, so floors are kept
as pairs of orbit indices together with their enclosures.  Comparisons of
two endpoints with the same index are exact; all others go through the
enclosures and fail loudly when they overlap.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field

from .errors import DomainError, MonotonicityFault, PrecisionExhausted
from .kneading import cutting_time, kneading_map
from .rigorous import RInterval
from .tent import TentSystem, orbit_point


@dataclass(frozen=True)
class Floor:
    left: int           # orbit index of the left endpoint
    right: int
    lo: RInterval       # enclosure of the left endpoint
    hi: RInterval

    def enclosure(self) -> RInterval:
        return RInterval(self.lo.lo, self.hi.hi, max(self.lo.prec, self.hi.prec))

    def length(self) -> RInterval:
        return self.hi - self.lo

    def contains_zero(self) -> bool:
        """Certified 0 in the interior; raises when undecidable."""
        s0, s1 = _sign(self.lo), _sign(self.hi)
        return s0 < 0 < s1

    def avoids_zero(self) -> bool:
        return self.lo.positive() or self.hi.negative()


@dataclass
class Tower:
    index: int
    level: int
    height: int
    floors: list[Floor]

    @property
    def base(self) -> Floor:
        return self.floors[0]


@dataclass
class Cover:
    d: int
    k: int
    towers: dict[int, Tower] = field(default_factory=dict)

    def floor_count(self) -> int:
        return sum(t.height for t in self.towers.values())

    def all_floors(self):
        for i, t in self.towers.items():
            for n, f in enumerate(t.floors):
                yield i, n, f


def _sign(x: RInterval) -> int:
    s = x.sign()
    if s == 0:
        raise PrecisionExhausted("endpoint enclosure meets the turning point")
    return s


def _floor(sys: TentSystem, i: int, j: int) -> Floor:
    """Floor spanned by c_i and c_j, ordered left to right."""
    x, y = orbit_point(sys, i), orbit_point(sys, j)
    if x.precedes(y):
        return Floor(i, j, x, y)
    if y.precedes(x):
        return Floor(j, i, y, x)
    raise PrecisionExhausted(f"cannot order c_{i} and c_{j}")


def tower_range(d: int, k: int) -> list[int]:
    return [1] + list(range(max(d - k + 1, 2), d + 1))


def tower_height(d: int, i: int, k: int) -> int:
    if i == 1:
        return cutting_time(d, kneading_map(d, k + 1))
    return cutting_time(d, kneading_map(d, k + i - d))


def interval_I_indices(d: int, k: int) -> tuple[int, int]:
    if k < 0:
        raise DomainError("k must be >= 0")
    if k == 0:
        return 2, 1
    j = (k - 1) % d + 1
    return cutting_time(d, k), cutting_time(d, k - j + d + 1)


def base_indices(d: int, i: int, k: int) -> tuple[int, int]:
    """Orbit indices of the endpoints of J_{i,k}."""
    if i == 1:
        return interval_I_indices(d, k)
    if not (max(2, d - k + 1) <= i <= d):
        raise IndexError(f"tower {i} does not exist at level {k}")
    m = k - 1 + i
    q = cutting_time(d, kneading_map(d, m))
    return cutting_time(d, m) + q, q


def floor_indices(d: int, i: int, k: int, n: int) -> tuple[int, int]:
    """Endpoint indices of f^n(J_{i,k})."""
    A, B = base_indices(d, i, k)
    if n == 0:
        return A, B
    if i == 1:
        # I_k contains 0, so its image is [c_{S(k)+1}, c_1]
        return cutting_time(d, k) + n, n
    return A + n, B + n


def max_orbit_index(d: int, kmax: int) -> int:
    """Largest orbit index any cover or check up to level kmax touches."""
    m = cutting_time(d, kmax + 1)
    for k in range(kmax + 1):
        for i in tower_range(d, k):
            h = tower_height(d, i, k)
            A, B = floor_indices(d, i, k, h - 1)
            m = max(m, A + 1, B + 1)
        m = max(m, cutting_time(d, k + d) + cutting_time(d, k))
    return m


def interval_I(sys: TentSystem, k: int) -> RInterval:
    i, j = interval_I_indices(sys.d, k)
    f = _floor(sys, i, j)
    if not f.contains_zero():
        raise PrecisionExhausted(f"0 not certified inside I_{k}")
    return f.enclosure()


def base_interval_J(sys: TentSystem, i: int, k: int) -> RInterval:
    A, B = base_indices(sys.d, i, k)
    return _floor(sys, A, B).enclosure()


def build_cover(sys: TentSystem, k: int) -> Cover:
    d = sys.d
    if k < 0:
        raise DomainError("k must be >= 0")
    cover = Cover(d=d, k=k)
    for i in tower_range(d, k):
        h = tower_height(d, i, k)
        floors = [_floor(sys, *floor_indices(d, i, k, n)) for n in range(h)]
        for n, f in enumerate(floors):
            if (i, n) != (1, 0) and not f.avoids_zero():
                raise MonotonicityFault(
                    f"floor {n} of tower {i} at level {k} meets the turning point")
        cover.towers[i] = Tower(index=i, level=k, height=h, floors=floors)
    return cover


# ---------------------------------------------------------------------------
# certificates

def _le(i: int, x: RInterval, j: int, y: RInterval) -> bool:
    return i == j or x.precedes(y)


def floor_inside(child: Floor, parent: Floor) -> bool:
    return (_le(parent.left, parent.lo, child.left, child.lo)
            and _le(child.right, child.hi, parent.right, parent.hi))


def point_in_floor(n: int, x: RInterval, f: Floor) -> bool:
    return _le(f.left, f.lo, n, x) and _le(n, x, f.right, f.hi)


class _FloorIndex:
    """Floors of one cover sorted by left end, for membership queries."""

    def __init__(self, cover: Cover):
        items = sorted(cover.all_floors(), key=lambda t: t[2].lo.lo)
        self.items = items
        self.keys = [t[2].lo.lo for t in items]
        # running maximum of right ends, to stop backward scans early
        self.reach = []
        top = None
        for t in items:
            top = t[2].hi.hi if top is None else max(top, t[2].hi.hi)
            self.reach.append(top)

    def find(self, n: int, x: RInterval):
        """(tower, floor) of some floor certified to hold c_n, else None."""
        stop = bisect_right(self.keys, x.hi)
        for pos in range(stop - 1, -1, -1):
            if self.reach[pos] < x.lo:
                break
            i, m, f = self.items[pos]
            if point_in_floor(n, x, f):
                return i, m
        # endpoints sharing the index may sort after x.hi; check them
        for i, m, f in self.items[stop:]:
            if f.left == n:
                return i, m
            if f.lo.lo > x.hi and f.left != n:
                break
        return None

    def find_floor(self, child: Floor):
        stop = bisect_right(self.keys, child.lo.hi)
        for pos in range(stop - 1, -1, -1):
            if self.reach[pos] < child.hi.lo:
                break
            i, m, f = self.items[pos]
            if floor_inside(child, f):
                return i, m
        for i, m, f in self.items[stop:]:
            if floor_inside(child, f):
                return i, m
            if f.lo.lo > child.lo.hi and f.left != child.left:
                break
        return None


def parent_floor(d: int, i: int, k: int, n: int) -> tuple[int, int]:
    """Floor of level k expected to contain floor n of tower i at level k+1."""
    if i == 1:
        h = tower_height(d, 1, k)
        return (1, n) if n < h else (2, n - h)
    if i == d:
        return 1, n
    return i + 1, n


@dataclass
class CoverReport:
    d: int
    k_max: int
    checks: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c["status"] != "fail" for c in self.checks)

    def add(self, name: str, k: int, status: str, **detail) -> None:
        self.checks.append({"check": name, "k": k, "status": status, **detail})

    def failures(self) -> list[dict]:
        return [c for c in self.checks if c["status"] == "fail"]


def _check_level(sys: TentSystem, cover: Cover, nxt: Cover | None,
                 report: CoverReport, n_test: int) -> None:
    d, k = cover.d, cover.k
    # floor count
    if k >= d - 1:
        cnt = cover.floor_count()
        ok = cnt == cutting_time(d, k)
        report.add("floor_count", k, "pass" if ok else "fail", count=cnt,
                   expected=cutting_time(d, k))
    # turning point only in the central base, and every top floor covers it
    bad = []
    for i, t in cover.towers.items():
        for n, f in enumerate(t.floors):
            if (i, n) == (1, 0):
                if not f.contains_zero():
                    bad.append((i, n))
            elif not f.avoids_zero():
                bad.append((i, n))
        top = t.floors[-1]
        if i == 1 and t.height == 1:
            # the top is the central base itself; it folds onto [c_{S(k)+1}, c_1]
            img = _floor(sys, *floor_indices(d, 1, k, 1))
        else:
            img = _floor(sys, top.left + 1, top.right + 1)
        if not img.contains_zero():
            bad.append((i, t.height - 1, "top image"))
    report.add("turning_point", k, "fail" if bad else "pass", where=bad[:5])
    # disjointness inside each tower
    if k >= 2 * d - 1:
        bad = []
        for i, t in cover.towers.items():
            fl = sorted(enumerate(t.floors), key=lambda p: p[1].lo.lo)
            for (n1, f1), (n2, f2) in zip(fl, fl[1:]):
                if not f1.hi.precedes(f2.lo):
                    bad.append((i, n1, n2))
        report.add("disjoint", k, "fail" if bad else "pass", where=bad[:5])
    else:
        report.add("disjoint", k, "not applicable")
    # nesting of the next level
    if nxt is not None:
        idx = None
        bad = []
        for i, t in nxt.towers.items():
            for n, f in enumerate(t.floors):
                pi, pn = parent_floor(d, i, k, n)
                par = cover.towers.get(pi)
                if par is not None and pn < par.height and floor_inside(f, par.floors[pn]):
                    continue
                idx = idx or _FloorIndex(cover)
                if idx.find_floor(f) is None:
                    bad.append((i, n))
        report.add("nesting", k, "fail" if bad else "pass", where=bad[:5])
    # orbit membership
    idx = _FloorIndex(cover)
    missing = [n for n in range(1, n_test + 1)
               if idx.find(n, orbit_point(sys, n)) is None]
    report.add("orbit_membership", k, "fail" if missing else "pass",
               n_test=n_test, where=missing[:5])


def verify_theorem_1_1(sys: TentSystem, k_max: int, n_test: int | None = None) -> CoverReport:
    d = sys.d
    if n_test is None:
        n_test = cutting_time(d, k_max + 1) - 1
    report = CoverReport(d=d, k_max=k_max)
    covers = [build_cover(sys, k) for k in range(k_max + 2)]
    for k in range(k_max + 1):
        _check_level(sys, covers[k], covers[k + 1], report, n_test)
    return report


def verify_split_lemma(sys: TentSystem, k: int) -> dict:
    """I_{k+d}^{S(k)} inside I_k, and disjoint from I_{k+1} when k >= d-1."""
    d = sys.d
    a = cutting_time(d, k)
    part = _floor(sys, cutting_time(d, k + d) + a, a)
    Ik = _floor(sys, *interval_I_indices(d, k))
    inside = floor_inside(part, Ik)
    out = {"k": k, "inside": inside}
    if k >= d - 1:
        nxt = _floor(sys, *interval_I_indices(d, k + 1))
        out["disjoint"] = part.hi.precedes(nxt.lo) or nxt.hi.precedes(part.lo)
    out["passed"] = all(v for key, v in out.items() if key != "k")
    return out
