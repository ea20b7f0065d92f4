"""Certified real arithmetic on top of mpmath's interval contexts.

Everything here revolves around two ideas:

* ``Enclosure`` -- a pair of exact rationals ``lo <= x <= hi`` bracketing a
  real number.  Endpoints coming out of mpmath intervals are dyadic, so the
  conversion to ``Fraction`` is exact and the bracket stays rigorous.
* ``CReal`` -- a small expression tree (constants, field operations, log,
  exp, powers, max) that can be evaluated to an interval at any working
  precision.  Comparisons and floors are decided by evaluating at
  escalating precision until the intervals separate, or a cap is hit.

Expression trees are plain frozen dataclasses, so they pickle cleanly and
can be shipped to worker processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

from mpmath.ctx_iv import MPIntervalContext

Rational = Union[int, Fraction]

DEFAULT_START_PREC = 64
DEFAULT_PREC_CAP = 4096


class PrecisionCapExceeded(ArithmeticError):
    """Raised when escalating precision fails to decide a comparison."""


def _fresh_context(prec: int) -> MPIntervalContext:
    ctx = MPIntervalContext()
    ctx.prec = prec
    return ctx


def _endpoint_fraction(t) -> Fraction:
    """Exact value of a libmp float tuple (sign, man, exp, bc)."""
    sign, man, exp, _bc = t
    man = int(man)
    if man == 0:
        if exp == 0:
            return Fraction(0)
        raise ArithmeticError("non-finite interval endpoint")
    v = Fraction(man << exp) if exp >= 0 else Fraction(man, 1 << -exp)
    return -v if sign else v


def iv_bounds(x) -> tuple[Fraction, Fraction]:
    """Exact rational endpoints of an mpmath interval."""
    a, b = x._mpi_
    return _endpoint_fraction(a), _endpoint_fraction(b)


def fraction_to_iv(ctx: MPIntervalContext, value: Fraction):
    """Rigorous interval containing an exact rational."""
    return ctx.mpf(value.numerator) / value.denominator


@dataclass(frozen=True)
class Enclosure:
    """Exact rational bracket ``lo <= x <= hi`` of a real quantity."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"inverted enclosure [{self.lo}, {self.hi}]")

    @staticmethod
    def exact(value: Rational) -> "Enclosure":
        v = Fraction(value)
        return Enclosure(v, v)

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __float__(self) -> float:
        return float(self.midpoint)

    def __contains__(self, value: Rational) -> bool:
        return self.lo <= value <= self.hi

    def __add__(self, other) -> "Enclosure":
        other = _as_enclosure(other)
        return Enclosure(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self) -> "Enclosure":
        return Enclosure(-self.hi, -self.lo)

    def __sub__(self, other) -> "Enclosure":
        return self + (-_as_enclosure(other))

    def __mul__(self, other) -> "Enclosure":
        other = _as_enclosure(other)
        products = [self.lo * other.lo, self.lo * other.hi,
                    self.hi * other.lo, self.hi * other.hi]
        return Enclosure(min(products), max(products))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Enclosure":
        other = _as_enclosure(other)
        if other.lo <= 0 <= other.hi:
            raise ZeroDivisionError("enclosure denominator straddles zero")
        return self * Enclosure(1 / other.hi, 1 / other.lo)

    def __rtruediv__(self, other) -> "Enclosure":
        return _as_enclosure(other) / self

    def certainly_lt(self, other) -> bool:
        return self.hi < _as_enclosure(other).lo

    def certainly_le(self, other) -> bool:
        return self.hi <= _as_enclosure(other).lo


def _as_enclosure(x) -> Enclosure:
    if isinstance(x, Enclosure):
        return x
    return Enclosure.exact(x)


# --------------------------------------------------------------------------
# Lazy certified reals
# --------------------------------------------------------------------------

class CReal:
    """A real number evaluable to a rigorous interval at any precision."""

    def _eval(self, ctx: MPIntervalContext):
        raise NotImplementedError

    def interval(self, prec: int):
        return self._eval(_fresh_context(prec))

    def bounds(self, prec: int) -> tuple[Fraction, Fraction]:
        return iv_bounds(self.interval(prec))

    def enclosure(self, bits: int = 53, cap: int = DEFAULT_PREC_CAP) -> Enclosure:
        """Enclosure with relative width at most ``2**-bits``.

        For values straddling zero the width requirement is absolute.
        """
        prec = max(DEFAULT_START_PREC, bits + 16)
        tol = Fraction(1, 1 << bits)
        while True:
            lo, hi = self.bounds(prec)
            if lo == hi:
                return Enclosure(lo, hi)
            scale = min(abs(lo), abs(hi)) if (lo > 0 or hi < 0) else Fraction(1)
            if hi - lo <= tol * scale:
                return Enclosure(lo, hi)
            prec *= 2
            if prec > cap:
                raise PrecisionCapExceeded(
                    f"enclosure width {float(hi - lo):.3g} not below target "
                    f"at precision cap {cap}")

    # operators ------------------------------------------------------------

    def __add__(self, other):
        return _Add(self, as_creal(other))

    def __radd__(self, other):
        return _Add(as_creal(other), self)

    def __sub__(self, other):
        return _Sub(self, as_creal(other))

    def __rsub__(self, other):
        return _Sub(as_creal(other), self)

    def __mul__(self, other):
        return _Mul(self, as_creal(other))

    def __rmul__(self, other):
        return _Mul(as_creal(other), self)

    def __truediv__(self, other):
        return _Div(self, as_creal(other))

    def __rtruediv__(self, other):
        return _Div(as_creal(other), self)

    def __neg__(self):
        return _Neg(self)

    def __float__(self) -> float:
        return float(self.enclosure(53).midpoint)


@dataclass(frozen=True)
class _Rat(CReal):
    value: Fraction

    def _eval(self, ctx):
        return fraction_to_iv(ctx, self.value)


@dataclass(frozen=True)
class _Add(CReal):
    a: CReal
    b: CReal

    def _eval(self, ctx):
        return self.a._eval(ctx) + self.b._eval(ctx)


@dataclass(frozen=True)
class _Sub(CReal):
    a: CReal
    b: CReal

    def _eval(self, ctx):
        return self.a._eval(ctx) - self.b._eval(ctx)


@dataclass(frozen=True)
class _Mul(CReal):
    a: CReal
    b: CReal

    def _eval(self, ctx):
        return self.a._eval(ctx) * self.b._eval(ctx)


@dataclass(frozen=True)
class _Div(CReal):
    a: CReal
    b: CReal

    def _eval(self, ctx):
        return self.a._eval(ctx) / self.b._eval(ctx)


@dataclass(frozen=True)
class _Neg(CReal):
    a: CReal

    def _eval(self, ctx):
        return -self.a._eval(ctx)


@dataclass(frozen=True)
class _Log(CReal):
    a: CReal

    def _eval(self, ctx):
        return ctx.log(self.a._eval(ctx))


@dataclass(frozen=True)
class _Exp(CReal):
    a: CReal

    def _eval(self, ctx):
        return ctx.exp(self.a._eval(ctx))


@dataclass(frozen=True)
class _IntPow(CReal):
    a: CReal
    k: int

    def _eval(self, ctx):
        return self.a._eval(ctx) ** self.k


@dataclass(frozen=True)
class _Max(CReal):
    a: CReal
    b: CReal

    def _eval(self, ctx):
        # max(a, b) = (a + b + |a - b|) / 2, rigorous in interval arithmetic
        ia, ib = self.a._eval(ctx), self.b._eval(ctx)
        return (ia + ib + abs(ia - ib)) / 2


def as_creal(x) -> CReal:
    """Coerce ints, Fractions, and decimal strings to certified reals."""
    if isinstance(x, CReal):
        return x
    if isinstance(x, (int, Fraction, str)):
        return _Rat(Fraction(x))
    raise TypeError(f"cannot interpret {x!r} as a certified real "
                    "(use int, Fraction, str, or CReal)")


def cr_log(x) -> CReal:
    return _Log(as_creal(x))


def cr_exp(x) -> CReal:
    return _Exp(as_creal(x))


def cr_max(a, b) -> CReal:
    return _Max(as_creal(a), as_creal(b))


def cr_pow(base, expo) -> CReal:
    """base**expo for positive base; integer exponents stay algebraic."""
    if isinstance(expo, (int, Fraction)) and Fraction(expo).denominator == 1:
        return _IntPow(as_creal(base), int(Fraction(expo)))
    return _Exp(_Mul(as_creal(expo), _Log(as_creal(base))))


#: log 2 / log 3, the Hausdorff dimension of the middle-third Cantor set.
GAMMA: CReal = _Div(_Log(_Rat(Fraction(2))), _Log(_Rat(Fraction(3))))


# --------------------------------------------------------------------------
# Certified decisions
# --------------------------------------------------------------------------

def compare(a: CReal, b: CReal, start: int = DEFAULT_START_PREC,
            cap: int = DEFAULT_PREC_CAP) -> int:
    """-1 if a < b, +1 if a > b, decided rigorously.

    Raises PrecisionCapExceeded if the two values cannot be separated up to
    the precision cap (in particular when they are equal).
    """
    diff = a - b
    prec = start
    while prec <= cap:
        lo, hi = diff.bounds(prec)
        if hi < 0:
            return -1
        if lo > 0:
            return 1
        if lo == hi == 0:
            raise PrecisionCapExceeded("values are exactly equal")
        prec *= 2
    raise PrecisionCapExceeded(
        f"comparison undecided at precision cap {cap}")


def certify_gt(a, b, start: int = DEFAULT_START_PREC,
               cap: int = DEFAULT_PREC_CAP) -> bool:
    return compare(as_creal(a), as_creal(b), start, cap) > 0


def certified_floor(x: CReal, start: int = DEFAULT_START_PREC,
                    cap: int = DEFAULT_PREC_CAP) -> int:
    """floor(x) decided by escalation; fails if x sits on an integer."""
    prec = start
    while prec <= cap:
        lo, hi = x.bounds(prec)
        flo, fhi = math.floor(lo), math.floor(hi)
        if flo == fhi:
            return flo
        prec *= 2
    raise PrecisionCapExceeded(f"floor undecided at precision cap {cap}")


# --------------------------------------------------------------------------
# Exact rational powers
# --------------------------------------------------------------------------

def int_nth_root(x: int, k: int) -> tuple[int, bool]:
    """(floor(x**(1/k)), exact?) for x >= 0, k >= 1, by integer Newton."""
    if x < 0 or k < 1:
        raise ValueError("int_nth_root requires x >= 0 and k >= 1")
    if k == 1 or x in (0, 1):
        return x, True
    r = 1 << -(-x.bit_length() // k)  # >= true root
    while True:
        nr = ((k - 1) * r + x // r ** (k - 1)) // k
        if nr >= r:
            break
        r = nr
    while r ** k > x:
        r -= 1
    while (r + 1) ** k <= x:
        r += 1
    return r, r ** k == x


_RATIONAL_POW_BIT_CAP = 1 << 20


def rational_pow(base: Fraction, expo: Fraction) -> Fraction | None:
    """base**expo as an exact Fraction, or None when irrational/too large."""
    base, expo = Fraction(base), Fraction(expo)
    if expo == 0:
        return Fraction(1)
    if base < 0:
        return None
    if base == 0:
        return Fraction(0) if expo > 0 else None
    p, q = expo.numerator, expo.denominator
    num, den = base.numerator, base.denominator
    if q > 1:
        rn, okn = int_nth_root(num, q)
        if not okn:
            return None
        rd, okd = int_nth_root(den, q)
        if not okd:
            return None
        num, den = rn, rd
    if abs(p) * max(num.bit_length(), den.bit_length()) > _RATIONAL_POW_BIT_CAP:
        return None
    return Fraction(num, den) ** p


def power_enclosure(base, expo, bits: int = 53,
                    cap: int = DEFAULT_PREC_CAP) -> Enclosure:
    """Certified enclosure of base**expo (base > 0), exact when possible."""
    if isinstance(base, (int, Fraction)) and isinstance(expo, (int, Fraction)):
        exact = rational_pow(Fraction(base), Fraction(expo))
        if exact is not None:
            return Enclosure.exact(exact)
    return cr_pow(base, expo).enclosure(bits, cap)
