"""Toeplitz symbols: polynomial, radial, general continuous, boundary extension."""
from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from numbers import Number
from typing import Callable

import numpy as np

from .polynomial import Polynomial
from .radial_measure import RadialProfile


@dataclass(frozen=True)
class SymbolSpec:
    """A bounded symbol on the ball.

    ``poly`` is set for every variant that admits exact integration
    (polynomials and radial profiles polynomial in r^2).  ``func`` evaluates
    the symbol on an ``(N, n)`` array of points; ``boundary`` evaluates its
    boundary restriction f* on sphere points.
    """

    kind: str
    n: int
    poly: Polynomial | None = None
    profile: RadialProfile | None = None
    func: Callable | None = None
    boundary: Callable | None = None
    label: str = ""

    # constructors
    @classmethod
    def polynomial(cls, p: Polynomial, label: str = "") -> SymbolSpec:
        return cls("polynomial", p.n, poly=p, label=label or repr(p))

    @classmethod
    def constant(cls, n: int, c=1) -> SymbolSpec:
        return cls.polynomial(Polynomial.constant(n, c) if c != 0 else Polynomial(n), label=str(c))

    @classmethod
    def coordinate(cls, n: int, i: int) -> SymbolSpec:
        return cls.polynomial(Polynomial.coordinate(n, i, Fraction(1)), label=f"x{i + 1}")

    @classmethod
    def radial(cls, profile, n: int, label: str = "") -> SymbolSpec:
        """``f(x) = phi(|x|)``; ``profile`` is a RadialProfile, coefficient list in r^2, or callable."""
        if not isinstance(profile, RadialProfile):
            profile = (RadialProfile.callable(profile) if callable(profile)
                       else RadialProfile.polynomial(profile))
        poly = None
        if profile.is_polynomial:
            poly = Polynomial(n)
            for i, c in enumerate(profile.coeffs):
                if c != 0:
                    poly = poly + Polynomial.norm_squared(n, i) * c
        return cls("radial", n, poly=poly, profile=profile, label=label or profile.label or "radial")

    @classmethod
    def continuous(cls, func: Callable, n: int, boundary: Callable | None = None,
                   label: str = "") -> SymbolSpec:
        """Symbol given by a vectorised callable on ``(N, n)`` points.

        Without an explicit ``boundary`` the symbol is assumed continuous on
        the closed ball and f* is its restriction.
        """
        return cls("continuous", n, func=func, boundary=boundary or func, label=label or "continuous")

    # evaluation
    @property
    def exact(self) -> bool:
        return self.poly is not None

    @property
    def degree(self) -> int | None:
        return self.poly.degree if self.poly is not None else None

    def evaluate(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.poly is not None:
            return self.poly.evaluate(pts)
        if self.profile is not None:
            return self.profile(np.linalg.norm(pts, axis=1))
        return np.asarray(self.func(pts))

    def boundary_values(self, sphere_points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(sphere_points, dtype=float))
        if self.poly is not None and self.kind != "boundary":
            return self.poly.evaluate(pts)
        if self.profile is not None:
            return np.full(pts.shape[0], self.profile.limit_at_one())
        if isinstance(self.boundary, Polynomial):
            return self.boundary.evaluate(pts)
        return np.asarray(self.boundary(pts))

    @property
    def boundary_polynomial(self) -> Polynomial | None:
        """f* as a polynomial when it is one."""
        if self.kind == "boundary":
            return self.boundary if isinstance(self.boundary, Polynomial) else None
        if self.kind == "radial":
            return Polynomial.constant(self.n, sum(self.profile.coeffs)) if self.profile.is_polynomial else None
        return self.poly

    # algebra
    def conjugate(self) -> SymbolSpec:
        if self.poly is not None and self.kind == "polynomial":
            return SymbolSpec.polynomial(self.poly.conjugate(), label=f"conj({self.label})")
        if self.poly is not None:
            return replace(self, poly=self.poly.conjugate(), label=f"conj({self.label})")
        f, b = self.evaluate, self.boundary_values
        return SymbolSpec.continuous(lambda x: np.conj(f(x)), self.n, lambda z: np.conj(b(z)),
                                     label=f"conj({self.label})")

    def __mul__(self, other):
        if isinstance(other, Number):
            if self.poly is not None:
                return SymbolSpec.polynomial(self.poly * other, label=f"{other}*({self.label})")
            f, b = self.evaluate, self.boundary_values
            return SymbolSpec.continuous(lambda x: other * f(x), self.n, lambda z: other * b(z))
        if not isinstance(other, SymbolSpec):
            return NotImplemented
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        if self.poly is not None and other.poly is not None:
            return SymbolSpec.polynomial(self.poly * other.poly, label=f"({self.label})*({other.label})")
        f, g = self.evaluate, other.evaluate
        fb, gb = self.boundary_values, other.boundary_values
        return SymbolSpec.continuous(lambda x: f(x) * g(x), self.n, lambda z: fb(z) * gb(z),
                                     label=f"({self.label})*({other.label})")

    __rmul__ = __mul__

    def __add__(self, other):
        if not isinstance(other, SymbolSpec):
            return NotImplemented
        if self.poly is not None and other.poly is not None:
            return SymbolSpec.polynomial(self.poly + other.poly, label=f"{self.label} + {other.label}")
        f, g = self.evaluate, other.evaluate
        fb, gb = self.boundary_values, other.boundary_values
        return SymbolSpec.continuous(lambda x: f(x) + g(x), self.n, lambda z: fb(z) + gb(z),
                                     label=f"{self.label} + {other.label}")

    def __sub__(self, other):
        return self + other * -1


def extend_boundary_symbol(fstar, n: int | None = None, label: str = "") -> SymbolSpec:
    """Extend boundary data to the ball by ``phi(x) = |x| f*(x/|x|)``, ``phi(0) = 0``.

    ``fstar`` is a Polynomial (read as a function on the sphere) or a
    vectorised callable on sphere points.  When every term of a polynomial
    f* has degree one the extension is that same polynomial.
    """
    if isinstance(fstar, Polynomial):
        n = fstar.n
        if not fstar.is_zero() and fstar.homogeneous_degree == 1:
            return SymbolSpec.polynomial(fstar, label=label or repr(fstar))
        fn = fstar.evaluate
    else:
        if n is None:
            raise ValueError("dimension is required for callable boundary data")
        fn = fstar

    def phi(points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        r = np.linalg.norm(pts, axis=1)
        out = np.zeros(pts.shape[0], dtype=complex if _is_complex(fn, n) else float)
        nz = r > 0
        if np.any(nz):
            out[nz] = r[nz] * np.asarray(fn(pts[nz] / r[nz, None]))
        return out

    return SymbolSpec("boundary", n, func=phi, boundary=fstar, label=label or "extension")


def _is_complex(fn, n) -> bool:
    probe = np.zeros((1, n))
    probe[0, 0] = 1.0
    return np.iscomplexobj(np.asarray(fn(probe)))
