"""Radial part of an O(n)-invariant probability measure on the unit ball.

``moment(k)`` is the 2k-th moment ``int r^{2k} dmu``.  Exact data (rational
atoms, rational Jacobi exponent) gives ``Fraction`` moments; float data gives
floats.  ``as_float()`` converts an exact measure for the floating path.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from numbers import Rational
from typing import Callable, Sequence

import numpy as np
from scipy import special

SUPPORT_GAP = 1e-3


class QuadratureError(ArithmeticError):
    """A quadrature did not reach its accuracy target."""


def _parse_number(x, exact: bool):
    if isinstance(x, str):
        return Fraction(x) if exact else float(Fraction(x))
    if exact and isinstance(x, (int, Rational)):
        return Fraction(x)
    return float(x)


@dataclass(frozen=True, eq=False)
class RadialMeasure:
    """Radial measure ``mu`` on [0, 1).

    Use the constructors :meth:`jacobi`, :meth:`atomic` and :meth:`quadrature`.
    ``truncated`` marks measures whose support stays away from r = 1; the
    moment-ratio limit diagnostics refuse them.
    """

    kind: str
    n: int
    alpha: object = None
    atoms: tuple = ()
    truncated: bool = False
    exact: bool = True
    _cache: list = field(default_factory=list, repr=False, compare=False)

    # constructors
    @classmethod
    def jacobi(cls, alpha=0, n: int = 2, exact: bool | None = None) -> RadialMeasure:
        """``dmu = c (1 - r^2)^alpha r^{n-1} dr`` normalised to mass one."""
        if n < 2:
            raise ValueError(f"dimension must be >= 2, got {n}")
        if exact is None:
            exact = isinstance(alpha, (int, Rational, str))
        a = _parse_number(alpha, exact)
        if a <= -1:
            raise ValueError(f"Jacobi exponent must exceed -1, got {alpha}")
        return cls("jacobi", n, a, (), False, exact)

    @classmethod
    def atomic(cls, atoms: Sequence, n: int = 2, truncated: bool = False,
               normalize: bool = True, exact: bool | None = None) -> RadialMeasure:
        """Finite sum of point masses ``[(r_j, w_j), ...]``."""
        if exact is None:
            exact = all(isinstance(v, (int, Rational, str)) for pair in atoms for v in pair)
        pts = [(_parse_number(r, exact), _parse_number(w, exact)) for r, w in atoms]
        cls._check_atoms(pts)
        if normalize:
            total = sum(w for _, w in pts)
            pts = [(r, w / total) for r, w in pts]
        elif abs(float(sum(w for _, w in pts)) - 1.0) > 1e-12:
            raise ValueError("atom weights must sum to one")
        if not truncated and max(float(r) for r, _ in pts) < 1 - SUPPORT_GAP:
            raise ValueError(
                "support condition fails: largest node is below 1 - 1e-3; "
                "pass truncated=True to accept a measure with truncated support"
            )
        return cls("atomic", n, None, tuple(pts), truncated, exact)

    @classmethod
    def geometric(cls, n: int = 2, count: int = 20) -> RadialMeasure:
        """Equal point masses at ``r_j = 1 - 2^-j``, ``j = 1..count``."""
        return cls.atomic([(1 - Fraction(1, 2 ** j), 1) for j in range(1, count + 1)], n)

    @classmethod
    def quadrature(cls, nodes, weights, n: int = 2, truncated: bool = False) -> RadialMeasure:
        """Discretisation of a user density by nodes and weights (normalised)."""
        pts = [(float(r), float(w)) for r, w in zip(nodes, weights)]
        cls._check_atoms(pts)
        total = sum(w for _, w in pts)
        return cls("quadrature", n, None, tuple((r, w / total) for r, w in pts), truncated, False)

    @classmethod
    def from_density(cls, density: Callable, n: int = 2, nodes: int = 200) -> RadialMeasure:
        """Gauss-Legendre discretisation of ``density(r) dr`` on [0, 1)."""
        x, w = special.roots_legendre(nodes)
        r = (x + 1) / 2
        return cls.quadrature(r, w * np.asarray(density(r), dtype=float) / 2, n=n)

    @staticmethod
    def _check_atoms(pts):
        if not pts:
            raise ValueError("at least one atom is required")
        for r, w in pts:
            if not 0 <= r < 1:
                raise ValueError(f"node {r} is outside [0, 1)")
            if w <= 0:
                raise ValueError(f"weight {w} is not positive")

    # conversions
    def as_float(self) -> RadialMeasure:
        if not self.exact:
            return self
        if self.kind == "jacobi":
            return RadialMeasure("jacobi", self.n, float(self.alpha), (), self.truncated, False)
        pts = tuple((float(r), float(w)) for r, w in self.atoms)
        return RadialMeasure(self.kind, self.n, None, pts, self.truncated, False)

    def with_mode(self, mode: str) -> RadialMeasure:
        if mode == "float":
            return self.as_float()
        if not self.exact:
            raise ValueError("a floating-point measure cannot be used in rational mode")
        return self

    @property
    def mode(self) -> str:
        return "rational" if self.exact else "float"

    @property
    def is_single_atom(self) -> bool:
        return self.kind != "jacobi" and len({r for r, _ in self.atoms}) == 1

    def describe(self) -> str:
        if self.kind == "jacobi":
            return f"jacobi(alpha={self.alpha}, n={self.n})"
        return f"{self.kind}({len(self.atoms)} atoms, n={self.n})"

    # moments
    def moment(self, k: int):
        """``int r^{2k} dmu``."""
        if k < 0:
            raise ValueError("moment index must be non-negative")
        cache = self._cache
        if not cache:
            cache.append(Fraction(1) if self.exact else 1.0)
        while len(cache) <= k:
            cache.append(self._next_moment(len(cache), cache[-1]))
        return cache[k]

    def _next_moment(self, k: int, prev):
        if self.kind == "jacobi":
            # mu(k) = (n/2)_k / (n/2 + alpha + 1)_k
            a = self.alpha
            half = Fraction(self.n, 2) if self.exact else self.n / 2
            return prev * (half + k - 1) / (half + a + k)
        return sum(w * r ** (2 * k) for r, w in self.atoms)

    def moment_table(self, K: int) -> list:
        return [self.moment(k) for k in range(K + 1)]

    def truncated_moment(self, k: int, r) -> float | Fraction:
        """``int_{[0, r]} s^{2k} dmu(s)``; exact for integer Jacobi exponent and rational r."""
        if self.kind != "jacobi":
            return sum((w * s ** (2 * k) for s, w in self.atoms if s <= r), Fraction(0) if self.exact else 0.0)
        a = self.alpha
        if self.exact and isinstance(r, (int, Rational)) and Fraction(a).denominator == 1 and a >= 0:
            # (c/2) int_0^{r^2} t^{k+n/2-1} (1-t)^a dt, expanded binomially
            r = Fraction(r)
            half = Fraction(self.n, 2)
            a = int(a)
            norm = 1 / _beta_exact(half, a)
            total = Fraction(0)
            for i in range(a + 1):
                e = k + half + i
                total += comb(a, i) * (-1) ** i * _rational_power(r, 2 * e) / e
            return norm * total
        a = float(a)
        p = k + self.n / 2
        # regularised incomplete beta times B(p, a+1)/B(n/2, a+1)
        ratio = float(self.moment(k)) if self.exact else self.moment(k)
        return ratio * special.betainc(p, a + 1, float(r) ** 2)

    # quadrature in the radial variable
    def radial_rule(self, nodes: int = 64) -> tuple[np.ndarray, np.ndarray]:
        """Nodes in [0, 1) and weights summing to one integrating against mu.

        Jacobi measures use Gauss-Jacobi in r with weight (1-r)^alpha r^{n-1};
        the smooth factor (1+r)^alpha is folded into the weights.
        """
        if self.kind != "jacobi":
            r = np.array([float(s) for s, _ in self.atoms])
            w = np.array([float(v) for _, v in self.atoms])
            return r, w
        a = float(self.alpha)
        x, w = special.roots_jacobi(nodes, a, self.n - 1)
        r = (x + 1) / 2
        w = w * (1 + r) ** a
        return r, w / w.sum()

    def integrate(self, fn: Callable, rtol: float = 1e-12, start: int = 32, max_nodes: int = 4096) -> float:
        """``int fn(r) dmu`` with node doubling until successive values agree to ``rtol``."""
        if self.kind != "jacobi":
            r, w = self.radial_rule()
            return float(np.dot(w, fn(r)))
        N = start
        r, w = self.radial_rule(N)
        prev = float(np.dot(w, fn(r)))
        while N < max_nodes:
            N *= 2
            r, w = self.radial_rule(N)
            cur = float(np.dot(w, fn(r)))
            if abs(cur - prev) <= rtol * max(abs(cur), 1e-300):
                return cur
            prev = cur
        raise QuadratureError(f"radial quadrature did not reach rtol={rtol} with {max_nodes} nodes")

    # serialization
    def to_json(self) -> dict:
        out: dict = {"type": self.kind, "n": self.n}
        if self.kind == "jacobi":
            out["alpha"] = str(self.alpha) if self.exact else self.alpha
        else:
            out["atoms"] = [[str(r), str(w)] if self.exact else [r, w] for r, w in self.atoms]
        if self.truncated:
            out["truncated"] = True
        return out

    @classmethod
    def from_json(cls, data) -> RadialMeasure:
        if isinstance(data, str):
            data = json.loads(data)
        kind = data.get("type")
        n = int(data.get("n", 2))
        if kind == "jacobi":
            return cls.jacobi(data.get("alpha", 0), n)
        if kind == "geometric":
            return cls.geometric(n, int(data.get("count", 20)))
        if kind == "atomic":
            return cls.atomic([tuple(p) for p in data["atoms"]], n, truncated=bool(data.get("truncated", False)))
        if kind == "quadrature":
            pts = data["atoms"]
            return cls.quadrature([p[0] for p in pts], [p[1] for p in pts], n, truncated=bool(data.get("truncated", False)))
        raise ValueError(f"unknown measure type {kind!r}")


def _beta_exact(p: Fraction, a: int) -> Fraction:
    # B(p, a+1) = a! / (p (p+1) ... (p+a))
    out = Fraction(1)
    for i in range(a + 1):
        out /= p + i
    for i in range(1, a + 1):
        out *= i
    return out


def _rational_power(r: Fraction, e: Fraction) -> Fraction:
    """``r**e`` for rational ``e`` with even denominator handled via r^(2e) integer."""
    e = Fraction(e)
    if e.denominator == 1:
        return r ** int(e)
    if e.denominator == 2:
        from .surd import rational_sqrt

        root = rational_sqrt(r)
        if root is None:
            raise ValueError("irrational power; pass a float cutoff instead")
        return root ** int(e * 2)
    raise ValueError("unsupported exponent")


# -- radial profiles and eigenvalues ----------------------------------------

@dataclass(frozen=True)
class RadialProfile:
    """``phi`` on [0, 1): either ``sum_i coeffs[i] r^{2i}`` or a vectorised callable."""

    coeffs: tuple | None = None
    func: Callable | None = None
    label: str = ""

    @classmethod
    def polynomial(cls, coeffs, label: str = "") -> RadialProfile:
        return cls(tuple(Fraction(c) if isinstance(c, (int, Rational, str)) else c for c in coeffs), None, label)

    @classmethod
    def callable(cls, func: Callable, label: str = "") -> RadialProfile:
        return cls(None, func, label)

    @property
    def is_polynomial(self) -> bool:
        return self.coeffs is not None

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.coeffs is not None:
            return sum(float(c) * r ** (2 * i) for i, c in enumerate(self.coeffs))
        return np.asarray(self.func(r), dtype=float)

    def limit_at_one(self) -> float:
        if self.coeffs is not None:
            return float(sum(self.coeffs))
        return float(self.func(np.array([1.0 - 1e-12]))[0])


def radial_eigenvalue(measure: RadialMeasure, phi: RadialProfile, m: int, rtol: float = 1e-12):
    """Eigenvalue on H_m of the Toeplitz operator with radial symbol ``phi``.

    Exact (a ratio of moment combinations) when ``phi`` is a polynomial in r^2.
    """
    if phi.is_polynomial:
        num = sum((c * measure.moment(m + i) for i, c in enumerate(phi.coeffs)), 0)
        return num / measure.moment(m)
    num = measure.integrate(lambda r: phi(r) * r ** (2 * m), rtol=rtol)
    den = measure.integrate(lambda r: r ** (2 * m), rtol=rtol)
    return num / den


@dataclass(frozen=True)
class GammaSequence:
    values: list
    strictly_increasing: bool
    equality_case: bool
    note: str = ""


def gamma_sequence(measure: RadialMeasure, m_max: int) -> GammaSequence:
    """Eigenvalues ``mu(m+1)/mu(m)`` of the Toeplitz operator with symbol |x|^2.

    A single atom gives a constant sequence (the Cauchy-Schwarz equality case);
    that is reported in the result, not raised.
    """
    vals = [measure.moment(m + 1) / measure.moment(m) for m in range(m_max + 1)]
    strict = all(b > a for a, b in zip(vals, vals[1:]))
    single = measure.is_single_atom
    note = "single atom: ratios are constant (equality case)" if single else ""
    if not strict and not single:
        note = "sequence is not strictly increasing"
    return GammaSequence(vals, strict, single, note)


@dataclass(frozen=True)
class RatioLimitReport:
    eigenvalues: list
    target: float
    gaps: list
    tail_max: list  # tail_max[M] = max_{m >= M} |lambda_m - target|
    converged: bool
    tolerance: float


def moment_ratio_limit_diagnostic(measure: RadialMeasure, phi: RadialProfile, gamma,
                                  m_max: int, tol: float = 0.05) -> RatioLimitReport:
    """Track ``lambda_m -> gamma`` for a profile with ``phi(1-) = gamma``."""
    if measure.truncated:
        raise ValueError("measure has truncated support; the ratio limit need not hold")
    lams = [radial_eigenvalue(measure, phi, m) for m in range(m_max + 1)]
    gaps = [abs(float(l) - float(gamma)) for l in lams]
    tail = gaps[:]
    for i in range(len(tail) - 2, -1, -1):
        tail[i] = max(tail[i], tail[i + 1])
    return RatioLimitReport(lams, float(gamma), gaps, tail, tail[-1] < tol, tol)
