"""Outward-rounded intervals on top of MPFR (via gmpy2).

Point values are plain ``gmpy2.mpfr`` objects, which already carry their
precision.  Every interval operation rounds the lower end toward -inf and
the upper end toward +inf, so true values stay enclosed.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import gmpy2
from gmpy2 import mpfr

BigReal = mpfr


@lru_cache(maxsize=None)
def ctx_down(prec: int):
    return gmpy2.context(precision=prec, round=gmpy2.RoundDown,
                         emin=gmpy2.get_emin_min(), emax=gmpy2.get_emax_max())


@lru_cache(maxsize=None)
def ctx_up(prec: int):
    return gmpy2.context(precision=prec, round=gmpy2.RoundUp,
                         emin=gmpy2.get_emin_min(), emax=gmpy2.get_emax_max())


@lru_cache(maxsize=None)
def ctx_near(prec: int):
    return gmpy2.context(precision=prec, round=gmpy2.RoundToNearest,
                         emin=gmpy2.get_emin_min(), emax=gmpy2.get_emax_max())


def neg(x: mpfr) -> mpfr:
    """Exact negation (bare ``-x`` would round to the global context)."""
    return ctx_near(max(x.precision, 2)).minus(x)


def absval(x: mpfr) -> mpfr:
    return x if x >= 0 else neg(x)


def next_up(x: mpfr, prec: int) -> mpfr:
    """x plus one unit in the last place at ``prec`` bits."""
    return ctx_up(prec).add(x, mpfr(2) ** (gmpy2.get_exp(x) - prec))


def _convert(x, prec: int, ctx) -> mpfr:
    if isinstance(x, Fraction):
        return ctx.div(mpfr(x.numerator, max(prec, x.numerator.bit_length())),
                       mpfr(x.denominator, max(prec, x.denominator.bit_length())))
    with ctx:
        return mpfr(x)


class RInterval:
    """Closed interval [lo, hi] with endpoints rounded outward."""

    __slots__ = ("lo", "hi", "prec")

    def __init__(self, lo, hi=None, prec: int = 64):
        if hi is None:
            hi = lo
        self.prec = prec
        self.lo = lo if isinstance(lo, mpfr) and lo.precision <= prec \
            else _convert(lo, prec, ctx_down(prec))
        self.hi = hi if isinstance(hi, mpfr) and hi.precision <= prec \
            else _convert(hi, prec, ctx_up(prec))
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x, prec: int) -> RInterval:
        return cls(x, x, prec)

    # -- queries -----------------------------------------------------------
    def width(self) -> mpfr:
        return ctx_up(self.prec).sub(self.hi, self.lo)

    def mid(self) -> mpfr:
        c = ctx_near(self.prec + 1)
        return c.div(c.add(self.lo, self.hi), 2)

    def mag(self) -> mpfr:
        return max(absval(self.lo), absval(self.hi))

    def mig(self) -> mpfr:
        if self.lo > 0:
            return self.lo
        if self.hi < 0:
            return neg(self.hi)
        return mpfr(0)

    def contains(self, x) -> bool:
        if isinstance(x, RInterval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= x <= self.hi

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def positive(self) -> bool:
        return self.lo > 0

    def negative(self) -> bool:
        return self.hi < 0

    def sign(self) -> int:
        """+1/-1 when certified, 0 when the enclosure meets zero."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        return 0

    def overlaps(self, other: RInterval) -> bool:
        return not (self.hi < other.lo or other.hi < self.lo)

    def precedes(self, other: RInterval) -> bool:
        """Certified self < other pointwise."""
        return self.hi < other.lo

    def hull(self, other: RInterval) -> RInterval:
        return RInterval(min(self.lo, other.lo), max(self.hi, other.hi),
                         max(self.prec, other.prec))

    # -- arithmetic --------------------------------------------------------
    def _p(self, other) -> int:
        return max(self.prec, other.prec) if isinstance(other, RInterval) else self.prec

    def _lift(self, other) -> RInterval:
        if isinstance(other, RInterval):
            return other
        return RInterval(other, other, self.prec)

    def __neg__(self) -> RInterval:
        return RInterval(neg(self.hi), neg(self.lo), self.prec)

    def __add__(self, other) -> RInterval:
        o = self._lift(other)
        p = self._p(o)
        return RInterval(ctx_down(p).add(self.lo, o.lo), ctx_up(p).add(self.hi, o.hi), p)

    __radd__ = __add__

    def __sub__(self, other) -> RInterval:
        o = self._lift(other)
        p = self._p(o)
        return RInterval(ctx_down(p).sub(self.lo, o.hi), ctx_up(p).sub(self.hi, o.lo), p)

    def __rsub__(self, other) -> RInterval:
        return self._lift(other) - self

    def __mul__(self, other) -> RInterval:
        o = self._lift(other)
        p = self._p(o)
        dn, up = ctx_down(p), ctx_up(p)
        if self.lo >= 0 and o.lo >= 0:
            return RInterval(dn.mul(self.lo, o.lo), up.mul(self.hi, o.hi), p)
        if self.lo >= 0 and o.hi <= 0:
            return RInterval(dn.mul(self.hi, o.lo), up.mul(self.lo, o.hi), p)
        if self.hi <= 0 and o.lo >= 0:
            return RInterval(dn.mul(self.lo, o.hi), up.mul(self.hi, o.lo), p)
        pairs = [(self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi)]
        return RInterval(min(dn.mul(x, y) for x, y in pairs),
                         max(up.mul(x, y) for x, y in pairs), p)

    __rmul__ = __mul__

    def __truediv__(self, other) -> RInterval:
        o = self._lift(other)
        if o.contains_zero():
            raise ZeroDivisionError("divisor interval contains zero")
        p = self._p(o)
        inv = RInterval(ctx_down(p).div(1, o.hi), ctx_up(p).div(1, o.lo), p)
        return self * inv

    def __abs__(self) -> RInterval:
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return RInterval(mpfr(0), max(neg(self.lo), self.hi), self.prec)

    def __pow__(self, n: int) -> RInterval:
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers")
        if self.lo >= 0:
            return RInterval(ctx_down(self.prec).pow(self.lo, n),
                             ctx_up(self.prec).pow(self.hi, n), self.prec)
        if n % 2 == 0:
            return abs(self) ** n
        return -((-self) ** n)

    def log(self) -> RInterval:
        if self.lo <= 0:
            raise ValueError("log of an interval reaching zero")
        return RInterval(ctx_down(self.prec).log(self.lo),
                         ctx_up(self.prec).log(self.hi), self.prec)

    def exp(self) -> RInterval:
        return RInterval(ctx_down(self.prec).exp(self.lo),
                         ctx_up(self.prec).exp(self.hi), self.prec)

    def round_to(self, prec: int) -> RInterval:
        """Re-round outward to a (usually smaller) precision."""
        return RInterval(ctx_down(prec).add(self.lo, 0), ctx_up(prec).add(self.hi, 0), prec)

    def __repr__(self) -> str:
        return f"RInterval({decimal_string(self.lo, 12, 'down')}, " \
               f"{decimal_string(self.hi, 12, 'up')})"


def decimal_string(x: mpfr, digits: int = 20, direction: str = "near") -> str:
    """Scientific-notation string of x, rounded in the requested direction."""
    if x == 0:
        return "0"
    if not gmpy2.is_finite(x):
        return str(x)
    mode = {"down": gmpy2.RoundDown, "up": gmpy2.RoundUp,
            "near": gmpy2.RoundToNearest}[direction]
    with gmpy2.context(gmpy2.get_context(), round=mode):
        mant, exp, _ = x.digits(10, digits)
    sign = ""
    if mant.startswith("-"):
        sign, mant = "-", mant[1:]
    return f"{sign}{mant[0]}.{mant[1:]}e{exp - 1:+d}"


def enclosure_strings(iv: RInterval, digits: int = 20) -> tuple[str, str]:
    return decimal_string(iv.lo, digits, "down"), decimal_string(iv.hi, digits, "up")
