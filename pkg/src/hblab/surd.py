"""Exact real numbers of the form ``coef * sqrt(rad)`` with rational coef, rad.

Products stay exact.  Sums stay exact only when the radicands differ by a
rational square; otherwise the result drops to a plain ``float``.
"""
from __future__ import annotations

from fractions import Fraction
from math import isqrt, sqrt
from numbers import Rational

import numpy as np


def rational_sqrt(q) -> Fraction | None:
    """Exact square root of a non-negative rational, or ``None`` if irrational."""
    q = Fraction(q)
    if q < 0:
        return None
    a, b = isqrt(q.numerator), isqrt(q.denominator)
    if a * a == q.numerator and b * b == q.denominator:
        return Fraction(a, b)
    return None


class Surd:
    __slots__ = ("coef", "rad")

    def __init__(self, coef=0, rad=1):
        coef, rad = Fraction(coef), Fraction(rad)
        if rad < 0:
            raise ValueError("negative radicand")
        if coef == 0 or rad == 0:
            coef, rad = Fraction(0), Fraction(1)
        else:
            r = rational_sqrt(rad)
            if r is not None:
                coef, rad = coef * r, Fraction(1)
        self.coef = coef
        self.rad = rad

    @classmethod
    def sqrt(cls, q) -> Surd:
        return cls(1, q)

    @property
    def is_rational(self) -> bool:
        return self.rad == 1

    def to_fraction(self) -> Fraction:
        if not self.is_rational:
            raise ValueError(f"{self!r} is irrational")
        return self.coef

    def __float__(self) -> float:
        return float(self.coef) * sqrt(float(self.rad))

    def __complex__(self) -> complex:
        return complex(float(self))

    def _coerce(self, other):
        if isinstance(other, Surd):
            return other
        if isinstance(other, (int, Rational)):
            return Surd(other)
        return None

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return float(self) * other
        return Surd(self.coef * o.coef, self.rad * o.rad)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return float(self) / other
        if o.coef == 0:
            raise ZeroDivisionError("division by zero surd")
        return Surd(self.coef / (o.coef * o.rad), self.rad * o.rad)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return other / float(self)
        return o / self

    def __neg__(self) -> Surd:
        return Surd(-self.coef, self.rad)

    def __pos__(self) -> Surd:
        return self

    def __abs__(self) -> Surd:
        return Surd(abs(self.coef), self.rad)

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return float(self) + other
        if self.coef == 0:
            return o
        if o.coef == 0:
            return self
        ratio = rational_sqrt(o.rad / self.rad)
        if ratio is None:
            return float(self) + float(o)
        return Surd(self.coef + o.coef * ratio, self.rad)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def conjugate(self) -> Surd:
        return self

    def _sign(self) -> int:
        return (self.coef > 0) - (self.coef < 0)

    def __eq__(self, other) -> bool:
        o = self._coerce(other)
        if o is None:
            try:
                return float(self) == other
            except TypeError:
                return NotImplemented
        return self._sign() == o._sign() and self.coef ** 2 * self.rad == o.coef ** 2 * o.rad

    def __hash__(self):
        return hash((self._sign(), self.coef ** 2 * self.rad))

    def _cmp_key(self, other) -> int:
        # sign of self - other, exactly
        o = self._coerce(other)
        if o is None:
            d = float(self) - other
            return (d > 0) - (d < 0)
        a, b = self._sign(), o._sign()
        if a != b:
            return (a > b) - (a < b)
        sa, sb = self.coef ** 2 * self.rad, o.coef ** 2 * o.rad
        mag = (sa > sb) - (sa < sb)
        return mag if a >= 0 else -mag

    def __lt__(self, other):
        return self._cmp_key(other) < 0

    def __le__(self, other):
        return self._cmp_key(other) <= 0

    def __gt__(self, other):
        return self._cmp_key(other) > 0

    def __ge__(self, other):
        return self._cmp_key(other) >= 0

    def __bool__(self) -> bool:
        return self.coef != 0

    def __repr__(self) -> str:
        if self.is_rational:
            return f"Surd({self.coef})"
        return f"Surd({self.coef}*sqrt({self.rad}))"


def to_float_array(a) -> np.ndarray:
    """Convert an array/nested list of Surd, Fraction or float to ``float64``."""
    arr = np.asarray(a, dtype=object)
    return np.vectorize(float, otypes=[float])(arr) if arr.size else np.zeros(arr.shape)


def surd_array(rows) -> np.ndarray:
    arr = np.empty((len(rows), len(rows[0]) if rows else 0), dtype=object)
    for i, r in enumerate(rows):
        for j, x in enumerate(r):
            arr[i, j] = x
    return arr
