"""Sparse multivariate polynomials on R^n keyed by exponent multi-indices.

Coefficients are whatever numeric type is handed in: ``Fraction`` for the
exact path, ``float``/``complex`` for the floating path.  Nothing here rounds.
"""
from __future__ import annotations

import json
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from math import factorial
from numbers import Number
from typing import Iterable, Iterator, Mapping

import numpy as np

MultiIndex = tuple[int, ...]


def monomials(n: int, m: int) -> list[MultiIndex]:
    """All exponent tuples of length ``n`` and degree ``m``, ascending lexicographic order."""
    return list(_monomials(n, m))


@lru_cache(maxsize=None)
def _monomials(n: int, m: int) -> tuple[MultiIndex, ...]:
    out = []
    for combo in combinations_with_replacement(range(n), m):
        alpha = [0] * n
        for i in combo:
            alpha[i] += 1
        out.append(tuple(alpha))
    out.sort()
    return tuple(out)


@lru_cache(maxsize=None)
def multi_factorial(alpha: MultiIndex) -> int:
    out = 1
    for a in alpha:
        out *= factorial(a)
    return out


def _to_exact(c):
    if isinstance(c, str):
        return Fraction(c)
    return c


class Polynomial:
    """Polynomial on R^n stored as ``{alpha: coefficient}`` with no zero entries.

    Instances are treated as immutable; every operation returns a new one.
    """

    __slots__ = ("n", "_terms", "_hdeg")

    def __init__(self, n: int, terms: Mapping[MultiIndex, object] | Iterable = ()):
        if n < 1:
            raise ValueError(f"dimension must be positive, got {n}")
        self.n = n
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean: dict[MultiIndex, object] = {}
        for alpha, c in items:
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != n:
                raise ValueError(f"multi-index {alpha} does not have length {n}")
            if any(a < 0 for a in alpha):
                raise ValueError(f"negative exponent in {alpha}")
            c = _to_exact(c)
            if alpha in clean:
                c = clean[alpha] + c
            clean[alpha] = c
        self._terms = {a: c for a, c in clean.items() if c != 0}
        degs = {sum(a) for a in self._terms}
        self._hdeg = degs.pop() if len(degs) == 1 else None

    # construction helpers
    @classmethod
    def zero(cls, n: int) -> Polynomial:
        return cls(n)

    @classmethod
    def constant(cls, n: int, c=1) -> Polynomial:
        return cls(n, {(0,) * n: c})

    @classmethod
    def monomial(cls, alpha: Iterable[int], c=1) -> Polynomial:
        alpha = tuple(alpha)
        return cls(len(alpha), {alpha: c})

    @classmethod
    def coordinate(cls, n: int, i: int, c=1) -> Polynomial:
        """The coordinate function ``c * x_{i+1}`` (zero-based ``i``)."""
        alpha = [0] * n
        alpha[i] = 1
        return cls(n, {tuple(alpha): c})

    @classmethod
    def norm_squared(cls, n: int, power: int = 1) -> Polynomial:
        """``|x|^(2*power)``."""
        return _norm_sq_power(n, power)

    # basic protocol
    @property
    def terms(self) -> dict[MultiIndex, object]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coefficient(self, alpha: MultiIndex):
        return self._terms.get(tuple(alpha), 0)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[MultiIndex]:
        return iter(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def homogeneous_degree(self) -> int | None:
        """Common degree of all terms, or ``None`` (also ``None`` for the zero polynomial)."""
        return self._hdeg

    @property
    def degree(self) -> int:
        return max((sum(a) for a in self._terms), default=-1)

    @property
    def min_degree(self) -> int:
        return min((sum(a) for a in self._terms), default=-1)

    def is_exact(self) -> bool:
        return all(isinstance(c, (int, Fraction)) for c in self._terms.values())

    def homogeneous_parts(self) -> dict[int, Polynomial]:
        parts: dict[int, dict] = {}
        for a, c in self._terms.items():
            parts.setdefault(sum(a), {})[a] = c
        return {d: Polynomial(self.n, t) for d, t in sorted(parts.items())}

    def homogeneous_part(self, d: int) -> Polynomial:
        return Polynomial(self.n, {a: c for a, c in self._terms.items() if sum(a) == d})

    # arithmetic
    def _check(self, other: Polynomial) -> None:
        if other.n != self.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")

    def __add__(self, other):
        if isinstance(other, Number):
            other = Polynomial.constant(self.n, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check(other)
        out = dict(self._terms)
        for a, c in other._terms.items():
            out[a] = out[a] + c if a in out else c
        return Polynomial(self.n, out)

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        return Polynomial(self.n, {a: -c for a, c in self._terms.items()})

    def __sub__(self, other):
        if isinstance(other, Number):
            other = Polynomial.constant(self.n, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            self._check(other)
            out: dict[MultiIndex, object] = {}
            for a, c in self._terms.items():
                for b, d in other._terms.items():
                    g = tuple(x + y for x, y in zip(a, b))
                    out[g] = out[g] + c * d if g in out else c * d
            return Polynomial(self.n, out)
        if isinstance(other, Number):
            if other == 0:
                return Polynomial(self.n)
            return Polynomial(self.n, {a: c * other for a, c in self._terms.items()})
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Number):
            if isinstance(other, int):
                other = Fraction(other)
            return Polynomial(self.n, {a: c / other for a, c in self._terms.items()})
        return NotImplemented

    def __pow__(self, k: int) -> Polynomial:
        out = Polynomial.constant(self.n, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, Number):
            other = Polynomial.constant(self.n, other) if other != 0 else Polynomial(self.n)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    def __hash__(self):
        return hash((self.n, frozenset(self._terms.items())))

    def conjugate(self) -> Polynomial:
        return Polynomial(self.n, {a: _conj(c) for a, c in self._terms.items()})

    def map_coefficients(self, fn) -> Polynomial:
        return Polynomial(self.n, {a: fn(c) for a, c in self._terms.items()})

    def to_float(self) -> Polynomial:
        def conv(c):
            return complex(c) if isinstance(c, complex) else float(c)

        return self.map_coefficients(conv)

    def max_abs_coefficient(self) -> float:
        return max((abs(complex(c)) for c in self._terms.values()), default=0.0)

    # calculus
    def partial(self, i: int) -> Polynomial:
        out = {}
        for a, c in self._terms.items():
            if a[i]:
                b = list(a)
                b[i] -= 1
                out[tuple(b)] = c * a[i]
        return Polynomial(self.n, out)

    def laplacian(self) -> Polynomial:
        out: dict[MultiIndex, object] = {}
        for a, c in self._terms.items():
            for i, ai in enumerate(a):
                if ai >= 2:
                    b = list(a)
                    b[i] -= 2
                    b = tuple(b)
                    v = c * (ai * (ai - 1))
                    out[b] = out[b] + v if b in out else v
        return Polynomial(self.n, out)

    def evaluate(self, points) -> np.ndarray:
        """Evaluate at an ``(N, n)`` array of points in floating point."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.n:
            raise ValueError(f"points must have {self.n} columns")
        if not self._terms:
            return np.zeros(pts.shape[0])
        top = max(max(a) for a in self._terms)
        powers = pts[:, :, None] ** np.arange(top + 1)[None, None, :]
        complex_coef = any(isinstance(c, complex) for c in self._terms.values())
        out = np.zeros(pts.shape[0], dtype=complex if complex_coef else float)
        cols = np.arange(self.n)
        for a, c in self._terms.items():
            out += (complex(c) if complex_coef else float(c)) * np.prod(powers[:, cols, a], axis=1)
        return out

    def __call__(self, *x):
        pt = np.asarray(x[0] if len(x) == 1 else x, dtype=float)
        return self.evaluate(pt.reshape(1, -1))[0]

    # serialization
    def to_json(self) -> dict:
        terms = []
        for a in sorted(self._terms):
            c = self._terms[a]
            if isinstance(c, complex):
                raise TypeError("complex coefficients have no JSON form")
            q = Fraction(c)
            terms.append({"alpha": list(a), "num": str(q.numerator), "den": str(q.denominator)})
        return {"n": self.n, "terms": terms}

    @classmethod
    def from_json(cls, data) -> Polynomial:
        if isinstance(data, str):
            data = json.loads(data)
        n = int(data["n"])
        terms = {}
        for t in data["terms"]:
            terms[tuple(t["alpha"])] = Fraction(int(t["num"]), int(t["den"]))
        return cls(n, terms)

    def __repr__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for a in sorted(self._terms, key=lambda a: (-sum(a), a)):
            mono = "*".join(
                f"x{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(a) if e
            )
            c = self._terms[a]
            parts.append(f"({c})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


def _conj(c):
    return c.conjugate() if hasattr(c, "conjugate") else c


@lru_cache(maxsize=None)
def _norm_sq_power(n: int, power: int) -> Polynomial:
    base = Polynomial(n, {tuple(2 if j == i else 0 for j in range(n)): 1 for i in range(n)})
    out = Polynomial.constant(n, 1)
    for _ in range(power):
        out = out * base
    return out


def fischer_product(p: Polynomial, q: Polynomial):
    """Fischer pairing ``sum_alpha alpha! p_alpha conj(q_alpha)``.

    On harmonic homogeneous polynomials of degree ``m`` this is
    ``n(n+2)...(n+2m-2)`` times the sphere inner product.
    """
    small, big = (p, q) if len(p) <= len(q) else (q, p)
    total = 0
    for a, c in small.items():
        d = big.coefficient(a)
        if d != 0:
            pc, qc = (c, d) if small is p else (d, c)
            total += multi_factorial(a) * pc * _conj(qc)
    return total
