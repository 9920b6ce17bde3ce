"""Tent maps T_a(x) = a(1-|x|) - 1 with turning point c = 0.

The slope a_d realizing the Fibonacci-like combinatorics is found and
certified through the signed close returns y_k = c_{S(k)}, which obey

    y_{k+1} = y_{Q(k+1)} + s_h * a^h * |y_k|,   h = S(Q(k+1)),

valid as long as the orbit segment between consecutive cutting times
shadows the start of the critical orbit.  ``s_j`` is the orientation sign
``-(-1)^{#ones in eps_1..eps_{j-1}}``.  Checking that shadowing condition
and the sign of each y_k costs O(K) big-number operations, which is what
makes certificates at millions of bits possible.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpfr

from .errors import BracketFailure, DomainError, PrecisionExhausted
from .kneading import (cutting_index_above, cutting_time, kneading_map,
                       kneading_symbols)
from .rigorous import RInterval, ctx_down, ctx_near, ctx_up, neg, next_up

DEFAULT_GUARD = 64
_LOW = 64  # precision of the shadowing lower bounds


def default_guard() -> int:
    env = os.environ.get("FIBTOWER_GUARD_BITS")
    return int(env) if env else DEFAULT_GUARD


def tent_apply(a: RInterval, x: RInterval) -> RInterval:
    """Enclosure of a(1-|x|)-1; covers both branches when x meets 0."""
    p = max(a.prec, x.prec)
    dn, up = ctx_down(p), ctx_up(p)
    if x.lo >= 0:
        m = RInterval(dn.sub(1, x.hi), up.sub(1, x.lo), p)
    elif x.hi <= 0:
        m = RInterval(dn.add(1, x.lo), up.add(1, x.hi), p)
    else:
        m = RInterval(dn.sub(1, max(neg(x.lo), x.hi)), mpfr(1), p)
    return a * m - 1


# ---------------------------------------------------------------------------
# symbolic helpers

class _Signs:
    """Orientation data read off the kneading sequence."""

    def __init__(self, d: int, n: int):
        self.eps = kneading_symbols(d, n)

    def sigma(self, n: int) -> int:
        return 1 if self.eps[n] else -1

    def ones_before(self, j: int) -> int:
        return self.eps.count(1, 1, j)

    def orient(self, j: int) -> int:
        """s_j: sign of c_{S(k)+j} - c_j relative to |y_k|."""
        return -1 if self.ones_before(j) % 2 == 0 else 1


def _chain_plan(d: int, K: int, signs: _Signs):
    """(q, h, s_h, sigma_{S(k)}, sigma_{S(k+1)}) for blocks k = 0..K-1."""
    out = []
    for k in range(K):
        q = kneading_map(d, k + 1)
        h = cutting_time(d, q)
        out.append((q, h, signs.orient(h), signs.sigma(cutting_time(d, k)),
                    signs.sigma(cutting_time(d, k + 1))))
    return out


@dataclass
class ChainResult:
    """Outcome of running the close-return chain over a slope enclosure."""
    y: list            # RInterval y_0..y_k for certified k
    powers: list       # RInterval a^{S(m)}
    bounds: list       # lower bounds G_m of min_{j<S(m)} |c_j| a^{-j}
    status: str        # "ok", "flip", "undecided"
    block: int = -1    # failing block when status != "ok"
    deviation: int = 0  # orbit index of a certified sign flip

    @property
    def certified_k(self) -> int:
        return len(self.y) - 1


def _iterate_block(a: RInterval, x: RInterval, start: int, h: int, eps, dn):
    """Walk one block directly.  Returns (status, index, end value, min |c_j| a^-j)."""
    low = mpfr("inf")
    a_hi = ctx_up(_LOW).add(a.hi, 0)
    for j in range(1, h + 1):
        x = tent_apply(a, x)
        sgn = x.sign()
        if sgn == 0:
            return "undecided", start + j, x, low
        if sgn != (1 if eps[start + j] else -1):
            return "flip", start + j, x, low
        if j < h:
            scale = dn.div(1, ctx_up(_LOW).pow(a_hi, start + j))
            low = min(low, dn.mul(dn.add(x.mig(), 0), scale))
    return "ok", start + h, x, low


def _long_block_flip(d: int, y, pw, G, k: int, q: int, signs: _Signs) -> ChainResult:
    """Locate the first sign flip inside block k without walking it.

    With m the deepest index whose bound G_m still exceeds |y_k|, the orbit
    from S(k) shadows c_1..c_{S(m)} and c_{S(k)+S(m)} = y_m + s a^{S(m)} |y_k|.
    That is a certified first disagreement whenever the offset points at the
    turning point and is longer than |y_m|.
    """
    ak = abs(y[k])
    mag_hi = ctx_up(_LOW).add(ak.hi, 0)
    m = max(i for i in range(q) if G[i] > mag_hi)
    j = cutting_time(d, m)
    toward = signs.orient(j) != signs.sigma(j)
    status = "undecided"
    if toward and (pw[m] * ak).lo > abs(y[m]).hi:
        status = "flip"
    return ChainResult(y, pw, G, status, k, cutting_time(d, k) + j)


def run_chain(d: int, a: RInterval, K: int, max_block: int = 1 << 16) -> ChainResult:
    """Propagate y_k over every slope in ``a`` for k <= K.

    Status "flip" means some sign, at orbit index ``deviation``, is certified
    opposite to the kneading symbol; "undecided" means an enclosure met zero
    or a block was too long to walk directly.
    """
    signs = _Signs(d, cutting_time(d, K))
    plan = _chain_plan(d, K, signs)
    inf = mpfr("inf")
    y = [a - 1]
    pw = [a]
    G = [inf]
    if not y[0].positive():
        return ChainResult(y=[], powers=pw, bounds=G, status="undecided", block=-1)
    dn = ctx_down(_LOW)
    up = ctx_up(_LOW)
    for k, (q, h, s_h, sig_k, sig_next) in enumerate(plan):
        ak = abs(y[k])
        mag_hi = up.add(ak.hi, 0)
        inv_pow = dn.div(1, up.add(pw[k].hi, 0))  # a^{-S(k)} from below
        if mag_hi < G[q]:
            inc = pw[q] * ak
            nxt = y[q] + inc if s_h > 0 else y[q] - inc
            sgn = nxt.sign()
            if sgn != sig_next:
                status = "flip" if sgn == -sig_next else "undecided"
                return ChainResult(y, pw, G, status, k, cutting_time(d, k + 1))
            gap = dn.sub(G[q], mag_hi) if G[q] != inf else inf
            G.append(min(G[k], dn.mul(inv_pow, min(dn.add(ak.lo, 0), gap))))
        else:
            # the cheap shadowing bound is inconclusive; walk the block
            start = cutting_time(d, k)
            if h > max_block:
                return _long_block_flip(d, y, pw, G, k, q, signs)
            status, idx, nxt, low = _iterate_block(a, y[k], start, h, signs.eps, dn)
            if status != "ok":
                return ChainResult(y, pw, G, status, k, idx)
            G.append(min(G[k], dn.mul(inv_pow, dn.add(ak.lo, 0)), low))
        y.append(nxt)
        pw.append(pw[k] * pw[q])
    return ChainResult(y, pw, G, "ok", K, 0)


def compare_to_kneading(d: int, a: RInterval, K: int) -> tuple[int | None, int]:
    """Order of the itinerary of c_1 under slope a against the kneading sequence.

    Returns (cmp, n): cmp is -1/+1 when the first disagreement (at index n)
    is certified, 0 if the prefix of length S(K) agrees, None if undecided.
    The kneading invariant increases with a, so cmp = -1 means a < a_d.
    """
    res = run_chain(d, a, K)
    if res.status == "ok":
        return 0, cutting_time(d, K)
    n = res.deviation
    if res.status == "undecided":
        return None, n
    eps = kneading_symbols(d, n)
    mine = 1 - eps[n]
    odd = eps.count(1, 1, n) % 2 == 1
    bigger = (mine == 1) != odd
    return (1 if bigger else -1), n


# ---------------------------------------------------------------------------
# precision planning

_APPROX: dict[int, float] = {}


def approx_slope(d: int) -> float:
    """a_d to double precision (seed for planning, not a certificate)."""
    if d not in _APPROX:
        _APPROX[d] = float(_seed(d, 192, 64, 20 + 2 * d))
    return _APPROX[d]


def log_depths(d: int, K: int) -> list[float]:
    """Upper estimates U_k of -log_a |D_k| for k <= K (planning only)."""
    a = approx_slope(d)
    x, n = 0.0, 0
    U = []
    # small k from a double-precision orbit, which is accurate at this depth
    base = 2 * d - 2
    for k in range(min(K, base) + 1):
        target = cutting_time(d, k)
        while n < target:
            x = a * (1 - abs(x)) - 1
            n += 1
        U.append(-math.log(abs(x)) / math.log(a))
    for k in range(base + 1, K + 1):
        U.append(cutting_time(d, k + 1 - d) + U[k + 1 - d])
    return U


def required_precision(d: int, n: int, guard: int | None = None) -> int:
    """n + G bits: the contractual minimum for an n-step orbit."""
    if n < 1:
        raise DomainError("n must be >= 1")
    g = default_guard() if guard is None else guard
    return n + g


def planned_precision(d: int, n: int, guard: int | None = None) -> int:
    """Working bits that let the close-return chain certify every sign up to n.

    Orbit enclosures widen like a^n |slope error| while the closest return
    before index n sits at distance about a^{-U_K}, with S(K) >= n.
    """
    g = default_guard() if guard is None else guard
    K = cutting_index_above(d, max(n, 2))
    U = log_depths(d, K)
    lg = math.log2(approx_slope(d) + 1e-9)
    core = (cutting_time(d, K) + U[K]) * lg
    return int(math.ceil(core)) + 2 * g + 2 * K.bit_length() + 32


# ---------------------------------------------------------------------------
# solving for a_d

@dataclass
class TentSystem:
    d: int
    a: RInterval
    solved_prefix_len: int
    precision_bits: int
    guard: int = DEFAULT_GUARD
    _orbit: list = field(default_factory=list, repr=False, compare=False)
    _chain: ChainResult | None = field(default=None, repr=False, compare=False)

    @property
    def prec(self) -> int:
        return self.precision_bits

    def apply(self, x: RInterval) -> RInterval:
        return tent_apply(self.a, x)


def _newton_values(d: int, a: mpfr, K: int, w: int, plan,
                   wd: int | None = None) -> tuple[mpfr, mpfr]:
    """y_K(a) at w bits and dy_K/da at wd bits (round to nearest).

    Newton only needs a rough derivative, so its chain runs at lower
    precision on rounded copies of the values.
    """
    c = ctx_near(w)
    cd = ctx_near(wd or w)
    y = [c.sub(a, 1)]
    pw = [a]
    al = cd.add(a, 0)
    pwl = [al]
    dy = [mpfr(1)]
    dpw = [mpfr(1)]
    for k in range(K):
        q, h, s_h, sig_k, sig_next = plan[k]
        # |y_k| = sig_k * y_k
        ay, day = (y[k], dy[k]) if sig_k > 0 else (c.minus(y[k]), cd.minus(dy[k]))
        t = c.mul(pw[q], ay)
        dt = cd.add(cd.mul(dpw[q], cd.add(ay, 0)), cd.mul(pwl[q], day))
        if s_h > 0:
            y.append(c.add(y[q], t))
            dy.append(cd.add(dy[q], dt))
        else:
            y.append(c.sub(y[q], t))
            dy.append(cd.sub(dy[q], dt))
        pw.append(c.mul(pw[k], pw[q]))
        pwl.append(cd.mul(pwl[k], pwl[q]))
        dpw.append(cd.add(cd.mul(dpw[k], pwl[q]), cd.mul(pwl[k], dpw[q])))
    return y[K], dy[K]


def _seed(d: int, prec: int, width_bits: int, K: int) -> mpfr:
    lo, hi = mpfr(1), mpfr(2)
    c = ctx_near(prec)
    for _ in range(width_bits):
        mid = c.div(c.add(lo, hi), 2)
        cmp = None
        for tries in range(4):
            cmp, _n = compare_to_kneading(d, RInterval.point(mid, prec), K)
            if cmp is not None:
                break
            mid = next_up(mid, prec)
        if cmp is None or cmp == 0:
            return mid
        if cmp < 0:
            lo = mid
        else:
            hi = mid
    return c.div(c.add(lo, hi), 2)


def _refine(d: int, target_bits: int, guard: int) -> mpfr:
    """Point approximation of a_d good to about target_bits bits."""
    lg = math.log2(approx_slope(d))
    K_hi = 1
    while True:
        U = log_depths(d, K_hi)
        if (cutting_time(d, K_hi) + U[K_hi]) * lg > target_bits + guard:
            break
        K_hi += 1
    U = log_depths(d, K_hi)
    bits = [(cutting_time(d, k) + U[k]) * lg for k in range(K_hi + 1)]
    # start where double-ish seeds are already inside the Newton basin
    # the bisection seed is good to about 120 bits; Newton on y_K takes over
    # at the first K whose root a_K is closer to a_d than that
    K0 = next((k for k in range(K_hi + 1) if bits[k] > 96), K_hi)
    a = _seed(d, 256, 120, 24 + 2 * d)
    signs = _Signs(d, cutting_time(d, K_hi))
    plan = _chain_plan(d, K_hi, signs)
    for K in range(K0, K_hi + 1):
        w = int(bits[K]) + 2 * guard
        a = ctx_near(w).add(a, 0)
        # once a step is below half the target bits, the quadratic error
        # term of the next one is negligible; the certificate checks anyway
        tol_exp = -(int(bits[K]) + guard) // 2 - guard
        for _ in range(60):
            yv, dyv = _newton_values(d, a, K, w, plan, w // 2 + guard)
            if dyv == 0:
                break
            step = ctx_near(w).div(yv, dyv)
            a = ctx_near(w).sub(a, step)
            if step == 0 or gmpy2.get_exp(step) < tol_exp:
                break
    return a


def _endpoint(d: int, center: mpfr, work: int, g: int, K: int, side: int):
    """A bracket end on the given side of a_d with its certified comparison.

    A handful of offsets are tried because a single point can land where
    the first disagreement sits in a block too long to settle.
    """
    base = mpfr(2) ** (-work + g - 2)
    result = (None, None, 0)
    for frac in (1, 0.75, 0.5, 0.875, 0.625):
        half = ctx_up(work).mul(base, frac)
        if side < 0:
            pt = max(ctx_down(work).sub(center, half), next_up(mpfr(1), work))
        else:
            pt = min(ctx_up(work).add(center, half), mpfr(2))
        deep = K + 2 * d
        while True:
            cmp, n = compare_to_kneading(d, RInterval.point(pt, work + g), deep)
            if cmp != 0:
                break
            deep += d
        result = (pt, cmp, n)
        if cmp is not None:
            return result
    return result


def solve_parameter(d: int, target_prefix_len: int, precision_bits: int,
                    guard: int | None = None, max_escalations: int = 2) -> TentSystem:
    """Certified enclosure of a_d whose slopes all share the kneading prefix.

    Working precision is raised to the planned level when the requested
    bits cannot carry a certificate for the requested prefix; the returned
    enclosure is then narrower than requested.
    """
    g = default_guard() if guard is None else guard
    if d < 2:
        raise DomainError("d must be >= 2")
    if target_prefix_len < 1:
        raise DomainError("target_prefix_len must be >= 1")
    K = cutting_index_above(d, max(target_prefix_len, 2))
    work = max(precision_bits, planned_precision(d, target_prefix_len, g))
    for _ in range(max_escalations + 1):
        center = _refine(d, work + g, g)
        lo_pt, c_lo, n_lo = _endpoint(d, center, work, g, K, -1)
        hi_pt, c_hi, n_hi = _endpoint(d, center, work, g, K, 1)
        if c_lo is None or c_hi is None:
            work *= 2
            continue
        if c_lo != -1 or c_hi != 1:
            raise BracketFailure(f"endpoint comparison gave {c_lo}, {c_hi}")
        if min(n_lo, n_hi) <= target_prefix_len:
            work *= 2
            continue
        enclosure = RInterval(lo_pt, hi_pt, work)
        chain = run_chain(d, enclosure, K)
        if chain.status != "ok":
            work *= 2
            continue
        sys = TentSystem(d=d, a=enclosure, solved_prefix_len=target_prefix_len,
                         precision_bits=work, guard=g)
        sys._chain = chain
        return sys
    raise PrecisionExhausted(
        f"could not certify prefix {target_prefix_len} for d={d} at {work} bits")


def system_for(d: int, n: int, guard: int | None = None) -> TentSystem:
    """Solved system whose direct orbit is certified up to index n."""
    return solve_parameter(d, max(n, d + 1), 0, guard)


# ---------------------------------------------------------------------------
# orbits

def critical_orbit(sys: TentSystem, n: int) -> list[RInterval]:
    """Enclosures of c_1..c_n by direct outward-rounded iteration."""
    if n < 1:
        raise DomainError("n must be >= 1")
    orb = sys._orbit
    if not orb:
        orb.append(RInterval(0, 0, sys.prec))
    while len(orb) <= n:
        x = tent_apply(sys.a, orb[-1])
        if x.contains_zero():
            raise PrecisionExhausted(
                f"c_{len(orb)} enclosure meets the turning point at {sys.prec} bits")
        orb.append(x)
    return orb[1:n + 1]


def orbit_point(sys: TentSystem, n: int) -> RInterval:
    if n == 0:
        return RInterval(0, 0, sys.prec)
    return critical_orbit(sys, n)[n - 1]


def itinerary(sys: TentSystem, n: int) -> str:
    return "".join("1" if x.positive() else "0" for x in critical_orbit(sys, n))


def close_returns(sys: TentSystem, K: int) -> list[RInterval]:
    """Signed enclosures y_k = c_{S(k)} for k <= K via the chain."""
    ch = sys._chain
    if ch is None or ch.certified_k < K:
        ch = run_chain(sys.d, sys.a, K)
        if ch.certified_k < K:
            raise PrecisionExhausted(
                f"close-return chain stops at k={ch.certified_k} ({ch.status}) "
                f"at {sys.prec} bits")
        sys._chain = ch
    return ch.y[:K + 1]


def hofbauer_intervals(sys: TentSystem, N: int):
    """H_1..H_N as (enclosure, contains_turning_point) pairs.

    H_n is tracked by the orbit indices of its endpoints; the turning
    point is index 0.
    """
    orb = critical_orbit(sys, N)
    pt = lambda i: RInterval(0, 0, sys.prec) if i == 0 else orb[i - 1]
    out = []
    ends = (0, 1)
    for n in range(1, N + 1):
        if n > 1:
            prev_in = out[-1][1]
            ends = (n, 1) if prev_in else (n, ends[1] + 1)
        s0, s1 = pt(ends[0]).sign(), pt(ends[1]).sign()
        if ends[0] != 0 and s0 == 0 or s1 == 0:
            raise PrecisionExhausted(f"cannot place the turning point against H_{n}")
        inside = ends[0] == 0 or s0 != s1
        out.append((pt(ends[0]).hull(pt(ends[1])), inside))
    return out


def hofbauer_interval(sys: TentSystem, n: int) -> RInterval:
    if n < 1:
        raise DomainError("n must be >= 1")
    return hofbauer_intervals(sys, n)[-1][0]


def hofbauer_cutting_times(sys: TentSystem, N: int) -> list[int]:
    return [n for n, (_, inside) in enumerate(hofbauer_intervals(sys, N), 1) if inside]


def shadow_orbit(sys: TentSystem, n_max: int, prec: int = 512):
    """Yield (n, c_n) for n = 1..n_max at ``prec`` bits, without iterating.

    Inside block k, c_{S(k)+j} = c_j + s_j a^j |y_k|; every term is known to
    relative accuracy, so no error amplification occurs.  Needs a system
    whose chain certifies the blocks up to n_max.
    """
    d = sys.d
    K = cutting_index_above(d, n_max)
    ys = [y.round_to(prec) for y in close_returns(sys, K)]
    a = sys.a.round_to(prec)
    eps = kneading_symbols(d, n_max)
    odd = bytearray(n_max + 2)  # odd[j]: parity of ones in eps_1..eps_{j-1}
    for j in range(2, n_max + 2):
        odd[j] = odd[j - 1] ^ eps[j - 1]
    pts = [RInterval(0, 0, prec)]
    k = 0
    for n in range(1, n_max + 1):
        if n == 1:
            x = ys[0]
        else:
            while cutting_time(d, k + 1) < n:
                k += 1
            start = cutting_time(d, k)
            j = n - start
            if n == cutting_time(d, k + 1):
                x = ys[k + 1]
            else:
                off = (a ** j) * abs(ys[k])
                x = pts[j] - off if odd[j] == 0 else pts[j] + off
        pts.append(x)
        yield n, x
