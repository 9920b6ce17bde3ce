"""Lengths of close returns, floor diameters and Hausdorff sums.

All lengths come from the close-return chain y_k = c_{S(k)}, which carries
relative accuracy, so a^{S(k+d)} amplification never eats the signal as it
would for directly iterated enclosures.  The precision is the one planned for
certifying the chain to the deepest index a series touches.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2

from .covers import build_cover, max_orbit_index
from .errors import DomainError
from .kneading import cutting_time
from .rigorous import RInterval
from .tent import TentSystem, close_returns, planned_precision, system_for

DEFAULT_ALPHAS = (Fraction(1, 5), Fraction(1, 10), Fraction(1, 20))
SERIES_BITS = 512  # the chain delivers relative accuracy; series need no more


def dimension_precision(d: int, kmax: int) -> int:
    """Bits for a series up to kmax; P_kmax reaches D_{kmax+d-1}."""
    return planned_precision(d, cutting_time(d, kmax + d - 1))


def dimension_system(d: int, kmax: int) -> TentSystem:
    return system_for(d, cutting_time(d, kmax + d - 1))


def d_length(sys: TentSystem, k: int) -> RInterval:
    """|D_k| = |c_{S(k)} - c|."""
    if k < 1:
        raise DomainError("k must be >= 1")
    return abs(close_returns(sys, k)[k]).round_to(SERIES_BITS)


def _apow(sys: TentSystem, n: int) -> RInterval:
    cache = sys.__dict__.setdefault("_apow", {})
    if n not in cache:
        cache[n] = sys.a.round_to(SERIES_BITS) ** n
    return cache[n]


def delta_formula(sys: TentSystem, k: int) -> RInterval:
    """a^{S(k+1-d)-1} |D_k|, the top floor of the central tower."""
    return _apow(sys, cutting_time(sys.d, k + 1 - sys.d) - 1) * d_length(sys, k)


def delta_direct(sys: TentSystem, k: int) -> tuple[RInterval, tuple[int, int]]:
    """Largest floor length of the level-k cover and where it sits."""
    cover = build_cover(sys, k)
    best, where = None, None
    for i, n, f in cover.all_floors():
        ln = f.length()
        if best is None or ln.lo > best.lo:
            where = (i, n)
        best = ln if best is None else RInterval(max(best.lo, ln.lo), max(best.hi, ln.hi),
                                                 max(best.prec, ln.prec))
    return best, where


def delta_k(sys: TentSystem, k: int, direct_sys: TentSystem | None = None) -> dict:
    formula = delta_formula(sys, k)
    out = {"k": k, "formula": formula, "direct": None, "consistent": None,
           "argmax": None}
    if direct_sys is not None:
        direct, where = delta_direct(direct_sys, k)
        out.update(direct=direct, argmax=where, consistent=direct.overlaps(formula))
    return out


def diameter_product(sys: TentSystem, k: int) -> RInterval:
    """a^{S(k+d)} times |D_{k+1}| ... |D_{k+d-1}|."""
    d = sys.d
    p = _apow(sys, cutting_time(d, k + d))
    for j in range(1, d):
        p = p * d_length(sys, k + j)
    return p


def _log(x: RInterval) -> RInterval:
    return x.round_to(128).log()


def hausdorff_sum(sys: TentSystem, k: int, alpha: Fraction | float) -> RInterval:
    """S(k) delta_k^alpha, through exp(alpha log delta) at 128 bits."""
    alpha = Fraction(alpha)
    if alpha < 0:
        raise DomainError("alpha must be >= 0")
    S = cutting_time(sys.d, k)
    if alpha == 0:
        return RInterval(S, S, 128)
    lg = _log(delta_formula(sys, k)) * RInterval(alpha, alpha, 128)
    return lg.exp() * S


def recurrence_exponent(sys: TentSystem, k_max: int) -> list[dict]:
    """Estimates -log|c_{S(k)} - c| / S(k) with a running supremum.

    Computed on enclosure midpoints; an exploration, not a certificate.
    """
    out = []
    sup = -math.inf
    for k in range(1, k_max + 1):
        D = d_length(sys, k)
        S = cutting_time(sys.d, k)
        mid = D.mid()
        val = -float(gmpy2.log(mid)) / S
        err = float(D.width() / mid) / S if mid > 0 else math.inf
        sup = max(sup, val)
        out.append({"k": k, "S": S, "exponent": val, "error": err, "running_sup": sup})
    return out


def tent_identity(sys: TentSystem, k: int) -> bool:
    """a^{S(k+1-d)} |D_k| = |D_{k+1}| + |D_{k+1-d}| within enclosure."""
    d = sys.d
    if k + 1 - d < 1:
        raise DomainError("needs k >= d")
    lhs = _apow(sys, cutting_time(d, k + 1 - d)) * d_length(sys, k)
    rhs = d_length(sys, k + 1) + d_length(sys, k + 1 - d)
    return lhs.overlaps(rhs)


def floor_length_formulas(sys: TentSystem, k: int) -> bool:
    """Floor lengths of the level-k cover against a^i |D_k| style products."""
    d = sys.d
    cover = build_cover(sys, k)
    ok = True
    for i, tower in cover.towers.items():
        for n, f in enumerate(tower.floors):
            if i == 1:
                if n == 0:
                    continue
                pred = _apow(sys, n) * d_length(sys, k)
            else:
                if k + i - 1 < 1:
                    continue
                pred = _apow(sys, cutting_time(d, k + i - d - 1) + n) \
                    * d_length(sys, k + i - 1)
            ok &= f.length().overlaps(pred)
    return ok


@dataclass
class DimensionSeries:
    d: int
    kmax: int
    alphas: tuple
    rows: list[dict] = field(default_factory=list)
    delta_threshold: int | None = None
    hsum_k0: dict = field(default_factory=dict)
    product_k0: int | None = None


def _tail_start(flags: list[bool], ks: list[int]) -> int | None:
    """Smallest k such that every flag from k onward holds."""
    start = None
    for k, ok in zip(ks, flags):
        if ok:
            start = k if start is None else start
        else:
            start = None
    return start


def dimension_series(sys: TentSystem, kmax: int, alphas=DEFAULT_ALPHAS,
                     direct_kmax: int = 14, direct_sys: TentSystem | None = None,
                     cauchy_bits: int = 20) -> DimensionSeries:
    """Series for k = 1..kmax.  Direct delta_k is measured for k <= direct_kmax."""
    d = sys.d
    alphas = tuple(Fraction(a) for a in alphas)
    if direct_kmax and direct_sys is None:
        direct_sys = system_for(d, max_orbit_index(d, direct_kmax))
    ser = DimensionSeries(d, kmax, alphas)
    for k in range(1, kmax + 1):
        row = delta_k(sys, k, direct_sys if k <= direct_kmax else None)
        row["D"] = d_length(sys, k)
        row["P"] = diameter_product(sys, k) if k + d - 1 <= kmax else None
        row["hsum"] = {a: hausdorff_sum(sys, k, a) for a in alphas}
        ser.rows.append(row)
    # delta: direct maximum agrees with the formula from here on
    ks = [r["k"] for r in ser.rows if r["direct"] is not None]
    flags = [r["consistent"] for r in ser.rows if r["direct"] is not None]
    ser.delta_threshold = _tail_start(flags, ks)
    # Hausdorff sums strictly decreasing from k0 on
    for a in alphas:
        flags, ks = [], []
        for r0, r1 in zip(ser.rows, ser.rows[1:]):
            ks.append(r0["k"])
            flags.append(r1["hsum"][a].precedes(r0["hsum"][a]))
        ser.hsum_k0[a] = _tail_start(flags, ks)
    # P_k: successive differences certified below 2^-cauchy_bits
    P = [(r["k"], r["P"]) for r in ser.rows if r["P"] is not None]
    eps = gmpy2.mpfr(2) ** (-cauchy_bits)
    flags = [abs(p1 - p0).hi < eps for (_, p0), (_, p1) in zip(P, P[1:])]
    ser.product_k0 = _tail_start(flags, [k for k, _ in P[:-1]])
    return ser
