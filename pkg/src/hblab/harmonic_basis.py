"""Harmonic polynomials on R^n: sphere moments, harmonic decomposition and
orthonormal bases of the degree-m blocks H_m.

Basis convention ``lex-gs-1``: the degree-m monomials are taken in ascending
lexicographic order of their exponent tuples, each is replaced by its
harmonic projection, and Gram-Schmidt runs in that order, dropping dependent
vectors.  In exact mode the stored vectors are orthogonal with integer
coefficients and the normalisation is kept separately as a squared norm.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, gcd, prod, sqrt

import numpy as np

from .surd import Surd, surd_array
from .polynomial import MultiIndex, Polynomial, fischer_product, monomials, multi_factorial

BASIS_CONVENTION = "lex-gs-1"
FLOAT_PIVOT = 1e-8


class IllConditionedBasis(ArithmeticError):
    pass


# -- sphere moments ---------------------------------------------------------

def _odd_double_factorial(k: int) -> int:
    # (2k-1)!!
    return prod(range(1, 2 * k, 2)) if k > 0 else 1


@lru_cache(maxsize=None)
def sphere_monomial_moment(n: int, alpha: MultiIndex) -> Fraction:
    """Integral of ``zeta^alpha`` against normalised surface measure on S^{n-1}.

    Reduces the Gamma-function formula to
    ``prod (alpha_i - 1)!! / (n (n+2) ... (n + |alpha| - 2))`` for even exponents.
    """
    alpha = tuple(alpha)
    if n < 2:
        raise ValueError(f"dimension must be >= 2, got {n}")
    if len(alpha) != n:
        raise ValueError(f"multi-index {alpha} has length {len(alpha)}, expected {n}")
    if any(a % 2 for a in alpha):
        return Fraction(0)
    half = [a // 2 for a in alpha]
    num = prod(_odd_double_factorial(b) for b in half)
    den = prod(n + 2 * i for i in range(sum(half)))
    return Fraction(num, den)


class SphereMomentTable:
    """Cached sphere monomial moments for one dimension."""

    def __init__(self, n: int):
        if n < 2:
            raise ValueError(f"dimension must be >= 2, got {n}")
        self.n = n

    def __getitem__(self, alpha: MultiIndex) -> Fraction:
        return sphere_monomial_moment(self.n, tuple(alpha))

    def integrate(self, p: Polynomial):
        """Integral of ``p`` over the sphere."""
        if p.n != self.n:
            raise ValueError("dimension mismatch")
        return sum((c * self[a] for a, c in p.items()), Fraction(0))

    def inner(self, p: Polynomial, q: Polynomial):
        """``<p, q>`` in L^2(sigma), summed term by term over monomial moments."""
        if p.n != self.n or q.n != self.n:
            raise ValueError("dimension mismatch")
        buckets: dict[tuple, list] = {}
        for b, d in q.items():
            buckets.setdefault(tuple(x & 1 for x in b), []).append((b, d.conjugate() if hasattr(d, "conjugate") else d))
        total = Fraction(0)
        for a, c in p.items():
            for b, d in buckets.get(tuple(x & 1 for x in a), ()):
                total += c * d * self[tuple(x + y for x, y in zip(a, b))]
        return total


def sphere_inner_product(p: Polynomial, q: Polynomial):
    return SphereMomentTable(p.n).inner(p, q)


# -- harmonic analysis ------------------------------------------------------

def laplacian(p: Polynomial) -> Polynomial:
    return p.laplacian()


def dim_harmonic(n: int, m: int) -> int:
    """Dimension of the space of degree-m harmonic homogeneous polynomials on R^n."""
    if n < 2 or m < 0:
        raise ValueError(f"need n >= 2 and m >= 0, got n={n}, m={m}")
    if m == 0:
        return 1
    if m == 1:
        return n
    return comb(n + m - 1, n - 1) - comb(n + m - 3, n - 1)


def fischer_sphere_factor(n: int, m: int) -> int:
    """``n (n+2) ... (n+2m-2)``: Fischer norm over sphere norm on H_m."""
    return prod(n + 2 * i for i in range(m))


def laplacian_power_factor(n: int, m: int, l: int) -> int:
    # Delta^l (|x|^{2l} h) = factor * h  for h in H_m
    return prod(2 * i * (n + 2 * m + 2 * i - 2) for i in range(1, l + 1))


def _projection_weights(n: int, k: int):
    # h_k = sum_j c_j |x|^{2j} Delta^j P with c_0 = 1
    c = [Fraction(1)]
    for j in range(1, k // 2 + 1):
        c.append(-c[-1] / (2 * j * (n + 2 * k - 2 * j - 2)))
    return c


def _require_homogeneous(P: Polynomial, k: int | None = None) -> int:
    if P.is_zero():
        if k is None:
            raise ValueError("degree of the zero polynomial must be given explicitly")
        return k
    d = P.homogeneous_degree
    if d is None:
        raise ValueError("polynomial is not homogeneous")
    if k is not None and k != d:
        raise ValueError(f"polynomial has degree {d}, expected {k}")
    return d


def harmonic_projection(P: Polynomial, k: int | None = None) -> Polynomial:
    """Top harmonic component ``h_k`` of a homogeneous degree-k polynomial."""
    k = _require_homogeneous(P, k)
    out = Polynomial(P.n)
    lap = P
    for j, c in enumerate(_projection_weights(P.n, k)):
        if lap.is_zero():
            break
        out = out + (Polynomial.norm_squared(P.n, j) * lap) * c
        lap = lap.laplacian()
    return out


def harmonic_decompose(P: Polynomial, k: int | None = None) -> list[Polynomial]:
    """Split homogeneous ``P`` of degree k as ``sum_j |x|^{2j} h_{k-2j}``.

    Returns ``[h_k, h_{k-2}, ...]``, each harmonic and homogeneous (zero
    components are returned as zero polynomials).
    """
    k = _require_homogeneous(P, k)
    n = P.n
    comps = []
    cur, deg = P, k
    while deg >= 0:
        weights = _projection_weights(n, deg)
        laps = [cur]
        for _ in range(1, len(weights)):
            laps.append(laps[-1].laplacian())
        h = Polynomial(n)
        rest = Polynomial(n)
        for j, (c, L) in enumerate(zip(weights, laps)):
            if L.is_zero():
                continue
            h = h + (Polynomial.norm_squared(n, j) * L) * c
            if j:
                rest = rest - (Polynomial.norm_squared(n, j - 1) * L) * c
        comps.append(h)
        cur, deg = rest, deg - 2
    return comps


def harmonic_decompose_linear(P: Polynomial, k: int | None = None) -> list[Polynomial]:
    """Same decomposition by solving ``Delta(|x|^2 q) = Delta P`` on monomial coefficients.

    Dense exact linear algebra; slow, kept as an independent cross-check.
    """
    import sympy

    k = _require_homogeneous(P, k)
    n = P.n
    if k < 2:
        return [P]
    rows = monomials(n, k - 2)
    cols = monomials(n, k - 2)
    r2 = Polynomial.norm_squared(n)
    idx = {a: i for i, a in enumerate(rows)}
    A = sympy.zeros(len(rows), len(cols))
    for j, b in enumerate(cols):
        img = (r2 * Polynomial.monomial(b)).laplacian()
        for a, c in img.items():
            A[idx[a], j] = sympy.Rational(c)
    rhs = sympy.zeros(len(rows), 1)
    for a, c in P.laplacian().items():
        rhs[idx[a], 0] = sympy.Rational(Fraction(c).numerator, Fraction(c).denominator)
    sol = A.LUsolve(rhs)
    q = Polynomial(n, {b: Fraction(int(sympy.fraction(sol[j])[0]), int(sympy.fraction(sol[j])[1]))
                       for j, b in enumerate(cols)})
    h = P - r2 * q
    return [h] + harmonic_decompose_linear(q, k - 2)


def sphere_pairing_terms(g: Polynomial, h: Polynomial, m: int) -> dict[int, object]:
    """Split ``<g, h>_sigma`` (``h`` in H_m) by the radial shift of each part of ``g``.

    Returns ``{l: value}`` where ``value`` is the contribution of the degree
    ``m + 2l`` part of ``g``.  Uses Fischer adjointness of ``Delta`` and
    ``|x|^2``, so no monomial moments are needed.
    """
    n = h.n
    F = fischer_sphere_factor(n, m)
    out = {}
    for d, gd in g.homogeneous_parts().items():
        if d < m or (d - m) % 2:
            continue
        l = (d - m) // 2
        L = gd
        for _ in range(l):
            L = L.laplacian()
        val = fischer_product(L, h)
        if val != 0:
            out[l] = val / (F * laplacian_power_factor(n, m, l))
    return out


def sphere_pairing(g: Polynomial, h: Polynomial, m: int):
    """``<g, h>`` in L^2(sigma) for arbitrary ``g`` and ``h`` in H_m."""
    return sum(sphere_pairing_terms(g, h, m).values())


# -- block bases ------------------------------------------------------------

@dataclass(frozen=True)
class HarmonicBlockBasis:
    """Basis of H_m orthonormal in L^2(sigma).

    ``vectors`` are mutually orthogonal harmonic polynomials and ``sq_norms``
    their sphere norms squared; the orthonormal elements are
    ``vectors[i] / sqrt(sq_norms[i])``.  In float mode the vectors are already
    normalised and ``sq_norms`` are all 1.0.
    """

    n: int
    degree: int
    vectors: tuple[Polynomial, ...]
    sq_norms: tuple
    mode: str = "rational"
    gram_tolerance: float = 0.0
    source: tuple[MultiIndex, ...] = field(default=(), repr=False)

    def __len__(self) -> int:
        return len(self.vectors)

    @property
    def exact(self) -> bool:
        return self.mode == "rational"

    @property
    def elements(self) -> list[Polynomial]:
        """Orthonormal elements with floating-point coefficients."""
        return [v.to_float() * (1.0 / sqrt(float(s))) for v, s in zip(self.vectors, self.sq_norms)]

    def fischer_norms(self) -> list:
        F = fischer_sphere_factor(self.n, self.degree)
        return [s * F for s in self.sq_norms]


def build_block_basis(n: int, m: int, mode: str = "rational") -> HarmonicBlockBasis:
    """Deterministic sigma-orthonormal basis of H_m (see module docstring)."""
    if mode not in ("rational", "float"):
        raise ValueError(f"unknown arithmetic mode {mode!r}")
    return _build(n, m, mode)


@lru_cache(maxsize=None)
def _build(n: int, m: int, mode: str) -> HarmonicBlockBasis:
    if n < 2 or m < 0:
        raise ValueError(f"need n >= 2 and m >= 0, got n={n}, m={m}")
    target = dim_harmonic(n, m)
    if mode == "rational":
        return _build_exact(n, m, target)
    return _build_float(n, m, target)


def _parity(alpha: MultiIndex) -> tuple:
    return tuple(a & 1 for a in alpha)


def _primitive(p: Polynomial) -> Polynomial:
    coeffs = [Fraction(c) for _, c in p.items()]
    den = 1
    for c in coeffs:
        den = den * c.denominator // gcd(den, c.denominator)
    num = 0
    for c in coeffs:
        num = gcd(num, (c * den).numerator)
    scale = Fraction(den, num)
    return p.map_coefficients(lambda c: Fraction(c) * scale)


def _build_exact(n: int, m: int, target: int) -> HarmonicBlockBasis:
    F = fischer_sphere_factor(n, m)
    vecs: list[Polynomial] = []
    fnorms: list[Fraction] = []
    parities: list[tuple] = []
    used: list[MultiIndex] = []
    for alpha in monomials(n, m):
        if len(vecs) == target:
            break
        v = harmonic_projection(Polynomial.monomial(alpha, Fraction(1)), m)
        par = _parity(alpha)
        af = multi_factorial(alpha)
        for p, fn, pp in zip(vecs, fnorms, parities):
            if pp != par:
                continue  # different sign-flip parity classes are Fischer-orthogonal
            # [proj x^alpha, p] = [x^alpha, p] because p is harmonic
            c = p.coefficient(alpha)
            if c:
                v = v - p * (af * c / fn)
        if v.is_zero():
            continue
        v = _primitive(v)
        vecs.append(v)
        fnorms.append(Fraction(fischer_product(v, v)))
        parities.append(par)
        used.append(alpha)
    if len(vecs) != target:
        raise IllConditionedBasis(f"found {len(vecs)} of {target} basis vectors for n={n}, m={m}")
    return HarmonicBlockBasis(n, m, tuple(vecs), tuple(fn / F for fn in fnorms), "rational", 0.0, tuple(used))


def _build_float(n: int, m: int, target: int) -> HarmonicBlockBasis:
    monos = monomials(n, m)
    index = {a: i for i, a in enumerate(monos)}
    F = float(fischer_sphere_factor(n, m))
    weight = np.array([multi_factorial(a) for a in monos], dtype=float) / F
    basis: list[np.ndarray] = []
    used = []
    for alpha in monos:
        if len(basis) == target:
            break
        proj = harmonic_projection(Polynomial.monomial(alpha, Fraction(1)), m)
        v = np.zeros(len(monos))
        for a, c in proj.items():
            v[index[a]] = float(c)
        norm0 = sqrt(float(np.dot(weight * v, v)))
        for _ in range(2):
            for e in basis:
                v = v - np.dot(weight * e, v) * e
        norm = sqrt(float(np.dot(weight * v, v)))
        if norm < FLOAT_PIVOT * norm0:
            continue
        basis.append(v / norm)
        used.append(alpha)
    if len(basis) != target:
        raise IllConditionedBasis(f"found {len(basis)} of {target} basis vectors for n={n}, m={m}")
    vecs = tuple(Polynomial(n, {a: float(x) for a, x in zip(monos, b) if x != 0.0}) for b in basis)
    G = np.array([[np.dot(weight * a, b) for b in basis] for a in basis])
    tol = float(np.max(np.abs(G - np.eye(len(basis))))) if basis else 0.0
    if tol > 1e-10:
        raise IllConditionedBasis(f"Gram deviation {tol:.3e} exceeds 1e-10 for n={n}, m={m}")
    return HarmonicBlockBasis(n, m, vecs, (1.0,) * len(vecs), "float", max(tol, 1e-14), tuple(used))


def _parity_split(p: Polynomial) -> dict[tuple, dict]:
    out: dict[tuple, dict] = {}
    for a, c in p.items():
        out.setdefault(_parity(a), {})[a] = c
    return out


def moment_gram(rows, cols, n: int) -> list[list]:
    """``[[<p, q>_sigma for q in cols] for p in rows]`` from monomial moments.

    Monomials of different sign-parity classes have zero joint moment, so the
    sum runs class by class as ``v_p^T M_c v_q`` with ``M_c`` the moment
    matrix of the class.
    """
    table = SphereMomentTable(n)
    rsplit = [_parity_split(p) for p in rows]
    csplit = [_parity_split(q.conjugate()) for q in cols]
    zero = Fraction(0)
    G = [[zero] * len(cols) for _ in rows]
    classes = {c for sp in rsplit for c in sp} & {c for sp in csplit for c in sp}
    for cls in sorted(classes):
        # row vectors pushed through the moment matrix
        pushed = []
        for sp in rsplit:
            v = sp.get(cls)
            if not v:
                pushed.append(None)
                continue
            w: dict = {}
            monos = {b for q in csplit for b in q.get(cls, ())}
            for b in monos:
                acc = zero
                for a, c in v.items():
                    acc += c * table[tuple(x + y for x, y in zip(a, b))]
                w[b] = acc
            pushed.append(w)
        for i, w in enumerate(pushed):
            if w is None:
                continue
            for j, sp in enumerate(csplit):
                q = sp.get(cls)
                if q:
                    G[i][j] += sum((w[b] * d for b, d in q.items()), zero)
    return G


def block_gram(basis: HarmonicBlockBasis, other: HarmonicBlockBasis | None = None):
    """Sphere Gram matrix of the orthonormal elements, via monomial moments.

    Exact mode gives an object array of :class:`Surd`; float mode a float array.
    """
    other = basis if other is None else other
    if basis.exact and other.exact:
        G = moment_gram(basis.vectors, other.vectors, basis.n)
        return surd_array([
            [Surd(G[i][j], 1 / (s * t)) for j, t in enumerate(other.sq_norms)]
            for i, s in enumerate(basis.sq_norms)
        ])
    G = moment_gram([v.to_float() for v in basis.vectors], [w.to_float() for w in other.vectors], basis.n)
    A = np.array(G, dtype=float)
    ds = np.array([float(s) for s in basis.sq_norms]) ** -0.5
    dt = np.array([float(t) for t in other.sq_norms]) ** -0.5
    return ds[:, None] * A * dt[None, :]
