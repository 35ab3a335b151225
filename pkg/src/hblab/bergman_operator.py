"""Block matrices of Toeplitz, Hankel and boundary operators on b^2_nu.

Matrices are taken against the b^2_nu-orthonormal bases
``e_i^(m) = Y_i^(m) / sqrt(mu(m))`` where ``Y^(m)`` is the sigma-orthonormal
basis of H_m from :func:`build_block_basis`.  In these coordinates the
unitary W is the identity on every block.

In rational mode stored entries are :class:`Surd` values (exact up to the one
square root coming from normalisation); in float mode they are float64.
"""
from __future__ import annotations

import json
import zipfile
from dataclasses import dataclass, field
from fractions import Fraction
from math import sqrt

import numpy as np

from .harmonic_basis import (
    BASIS_CONVENTION,
    HarmonicBlockBasis,
    SphereMomentTable,
    build_block_basis,
    dim_harmonic,
    fischer_sphere_factor,
    harmonic_decompose,
    laplacian_power_factor,
    sphere_pairing,
    sphere_pairing_terms,
)
from .polynomial import Polynomial, fischer_product
from .quadrature import sphere_rule
from .radial_measure import QuadratureError, RadialMeasure
from .surd import Surd, to_float_array
from .symbols import SymbolSpec


def _same_dim(measure: RadialMeasure, *polys: Polynomial) -> None:
    for p in polys:
        if p.n != measure.n:
            raise ValueError(f"polynomial lives in R^{p.n} but the measure is on R^{measure.n}")


# -- inner products and the projection Q --------------------------------------

def bergman_inner_product(p: Polynomial, q: Polynomial, measure: RadialMeasure):
    """``int_B p conj(q) dnu`` via polar coordinates and monomial sphere moments."""
    _same_dim(measure, p, q)
    table = SphereMomentTable(measure.n)
    qparts = q.homogeneous_parts()
    total = 0
    for a, pa in p.homogeneous_parts().items():
        for b, qb in qparts.items():
            if (a + b) % 2:
                continue
            s = table.inner(pa, qb)
            if s != 0:
                total += measure.moment((a + b) // 2) * s
    return total


def bergman_norm_squared(p: Polynomial, measure: RadialMeasure):
    return bergman_inner_product(p, p, measure)


def harmonic_pairing(g: Polynomial, h: Polynomial, m: int, measure: RadialMeasure):
    """``<g, h>_nu`` for ``h`` in H_m, without monomial moments."""
    total = 0
    for l, v in sphere_pairing_terms(g, h, m).items():
        total += measure.moment(m + l) * v
    return total


def project_Q(P: Polynomial, measure: RadialMeasure) -> Polynomial:
    """Orthogonal projection of a polynomial onto b^2_nu.

    Each homogeneous part is split as ``sum_j |x|^{2j} h_{k-2j}`` and
    ``|x|^{2j} h_{k-2j}`` is sent to ``mu(k-j)/mu(k-2j) * h_{k-2j}``.
    """
    _same_dim(measure, P)
    out = Polynomial(P.n)
    for k, Pk in P.homogeneous_parts().items():
        for j, h in enumerate(harmonic_decompose(Pk, k)):
            if not h.is_zero():
                out = out + h * (measure.moment(k - j) / measure.moment(k - 2 * j))
    return out


def hankel_gram(f: SymbolSpec, g: SymbolSpec, p: Polynomial, q: Polynomial, measure: RadialMeasure):
    """``<H_f p, H_g q> = <fp, gq> - <Q(fp), Q(gq)>`` for polynomial symbols."""
    fp, gq = _symbol_poly(f) * p, _symbol_poly(g) * q
    return bergman_inner_product(fp, gq, measure) - bergman_inner_product(
        project_Q(fp, measure), project_Q(gq, measure), measure)


def verify_toeplitz_hankel_identity(f: SymbolSpec, g: SymbolSpec, p: Polynomial, q: Polynomial,
                                    measure: RadialMeasure):
    """``|<(T_{gf} - T_g T_f) p, q> - <H_f p, H_{conj g} q>|``; zero in exact arithmetic."""
    fp = _symbol_poly(f) * p
    gpoly = _symbol_poly(g)
    t_gf = project_Q(gpoly * fp, measure)
    t_g_t_f = project_Q(gpoly * project_Q(fp, measure), measure)
    lhs = bergman_inner_product(t_gf, q, measure) - bergman_inner_product(t_g_t_f, q, measure)
    rhs = hankel_gram(f, g.conjugate(), p, q, measure)
    return abs(lhs - rhs)


def _symbol_poly(f) -> Polynomial:
    if isinstance(f, Polynomial):
        return f
    if f.poly is None:
        raise ValueError(f"symbol {f.label!r} has no polynomial form; exact path unavailable")
    return f.poly


# -- block operators ------------------------------------------------------------

@dataclass
class BlockOperator:
    """Degree-indexed block matrix; absent blocks are zero.

    Columns run over degrees ``0..max_degree``.  Rows may run further
    (``row_max``) so that every block a column couples to is present.
    """

    n: int
    max_degree: int
    row_max: int
    blocks: dict
    mode: str = "float"
    kind: str = "toeplitz"
    symbol: str = ""
    measure: str = ""
    bandwidth: int | None = None
    _float: dict = field(default_factory=dict, repr=False)

    def size(self, m: int) -> int:
        return dim_harmonic(self.n, m)

    def block(self, m: int, k: int) -> np.ndarray:
        """Float copy of block ``(m, k)``."""
        key = (m, k)
        if key not in self._float:
            if key in self.blocks:
                self._float[key] = to_float_array(self.blocks[key])
            else:
                self._float[key] = np.zeros((self.size(m), self.size(k)))
        return self._float[key]

    def exact_block(self, m: int, k: int):
        """Stored block (Surd entries in rational mode); zeros if absent."""
        if (m, k) in self.blocks:
            return self.blocks[(m, k)]
        z = np.empty((self.size(m), self.size(k)), dtype=object)
        z[...] = Surd(0)
        return z

    def offsets(self, lo: int, hi: int) -> list[int]:
        out, pos = [], 0
        for m in range(lo, hi + 1):
            out.append(pos)
            pos += self.size(m)
        out.append(pos)
        return out

    def dense(self, M0: int = 0, M: int | None = None, rows: tuple[int, int] | None = None) -> np.ndarray:
        """Compression to degrees ``M0..M`` (or rectangular with ``rows``)."""
        M = self.max_degree if M is None else M
        r0, r1 = rows if rows is not None else (M0, M)
        if M > self.max_degree or r1 > self.row_max:
            raise ValueError("window exceeds the assembled degrees")
        ro, co = self.offsets(r0, r1), self.offsets(M0, M)
        out = np.zeros((ro[-1], co[-1]))
        for (m, k), _ in self.blocks.items():
            if r0 <= m <= r1 and M0 <= k <= M:
                out[ro[m - r0]:ro[m - r0 + 1], co[k - M0]:co[k - M0 + 1]] = self.block(m, k)
        return out

    def column_stack(self, k: int) -> np.ndarray:
        rows = [self.block(m, k) for m in range(self.row_max + 1) if (m, k) in self.blocks]
        if not rows:
            return np.zeros((1, self.size(k)))
        return np.vstack(rows)

    def degree_norm(self, k: int) -> float:
        """``||A restricted to H_k||``: largest singular value of the column stack."""
        return float(np.linalg.norm(self.column_stack(k), 2))

    def describe(self) -> str:
        return f"{self.kind}[{self.symbol}]"

    # bundle i/o
    def header(self) -> dict:
        return {
            "n": self.n, "M": self.max_degree, "row_max": self.row_max,
            "measure": self.measure, "symbol": self.symbol, "mode": self.mode,
            "kind": self.kind, "bandwidth": self.bandwidth,
            "basis_convention": BASIS_CONVENTION,
            "blocks": {f"{m},{k}": list(self.block(m, k).shape) for (m, k) in sorted(self.blocks)},
        }

    def save_bundle(self, path) -> None:
        """Zip with ``header.json`` and ``blocks/m,k.f64`` (little-endian, row-major)."""
        with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as zf:
            zf.writestr("header.json", json.dumps(self.header(), indent=1, sort_keys=True))
            for (m, k) in sorted(self.blocks):
                arr = np.ascontiguousarray(self.block(m, k), dtype="<f8")
                zf.writestr(f"blocks/{m},{k}.f64", arr.tobytes(order="C"))

    @classmethod
    def load_bundle(cls, path) -> BlockOperator:
        with zipfile.ZipFile(path) as zf:
            head = json.loads(zf.read("header.json"))
            blocks = {}
            for key, shape in head["blocks"].items():
                m, k = (int(s) for s in key.split(","))
                data = np.frombuffer(zf.read(f"blocks/{key}.f64"), dtype="<f8")
                blocks[(m, k)] = data.reshape(shape).copy()
        return cls(head["n"], head["M"], head["row_max"], blocks, "float", head["kind"],
                   head["symbol"], head["measure"], head["bandwidth"])


def _bases(n: int, top: int, mode: str) -> list[HarmonicBlockBasis]:
    return [build_block_basis(n, m, mode) for m in range(top + 1)]


def _scale(pair, Ni, Nj, mu_m, mu_k, exact: bool):
    if exact:
        return Surd(pair, 1 / (Ni * Nj * mu_m * mu_k))
    return float(pair) / sqrt(float(Ni) * float(Nj) * float(mu_m) * float(mu_k))


def _coupled_rows(fparts: dict, k: int, row_max: int) -> list[int]:
    rows = set()
    for d in fparts:
        for m in range(max(0, k - d), min(row_max, k + d) + 1):
            if (k + d - m) % 2 == 0:
                rows.add(m)
    return sorted(rows)


def _exact_column(fpoly: Polynomial, k: int, rows, bases, measure, exact: bool) -> dict:
    n = fpoly.n
    bk = bases[k]
    cols = {m: [[0] * len(bk) for _ in range(len(bases[m]))] for m in rows}
    for j, pj in enumerate(bk.vectors):
        g = fpoly * pj
        chains = {}
        for d, gd in g.homogeneous_parts().items():
            chain = [gd]
            while len(chain) <= d // 2 and not chain[-1].is_zero():
                chain.append(chain[-1].laplacian())
            chains[d] = chain
        for m in rows:
            F = fischer_sphere_factor(n, m)
            for d, chain in chains.items():
                if d < m or (d - m) % 2:
                    continue
                l = (d - m) // 2
                if l >= len(chain):
                    continue
                weight = measure.moment(m + l) / (F * laplacian_power_factor(n, m, l))
                L = chain[l]
                for i, pi in enumerate(bases[m].vectors):
                    v = fischer_product(L, pi)
                    if v != 0:
                        cols[m][i][j] += v * weight
    out = {}
    for m in rows:
        bm = bases[m]
        arr = np.empty((len(bm), len(bk)), dtype=object if exact else float)
        for i in range(len(bm)):
            for j in range(len(bk)):
                arr[i, j] = _scale(cols[m][i][j], bm.sq_norms[i], bk.sq_norms[j],
                                   measure.moment(m), measure.moment(k), exact)
        if any(x != 0 for x in arr.flat):
            out[m] = arr
    return out


def assemble_toeplitz(f: SymbolSpec, measure: RadialMeasure, M: int, mode: str = "float",
                      rtol: float = 1e-9) -> BlockOperator:
    """Block matrix of ``T_f`` on degrees ``0..M``.

    Polynomial (and polynomial-radial) symbols are integrated exactly and only
    the blocks inside the bandwidth are built; the rows reach ``M + deg f``.
    Other symbols go through sphere x radial quadrature on degrees ``0..M``.
    """
    measure = measure.with_mode(mode)
    exact = mode == "rational"
    if f.n != measure.n:
        raise ValueError("symbol and measure dimensions differ")
    if f.poly is None:
        blocks = _quadrature_blocks(f, measure, M, rtol)
        return BlockOperator(f.n, M, M, blocks, mode, "toeplitz", f.label, measure.describe(), None)
    fparts = f.poly.homogeneous_parts()
    d = f.poly.degree if fparts else 0
    row_max = M + max(d, 0)
    bases = _bases(f.n, row_max, mode)
    blocks = {}
    for k in range(M + 1):
        rows = _coupled_rows(fparts, k, row_max)
        for m, arr in _exact_column(f.poly, k, rows, bases, measure, exact).items():
            blocks[(m, k)] = arr
    return BlockOperator(f.n, M, row_max, blocks, mode, "toeplitz", f.label, measure.describe(), max(d, 0))


def toeplitz_block(f: SymbolSpec, m: int, k: int, measure: RadialMeasure, mode: str = "rational",
                   rtol: float = 1e-9):
    """Matrix of ``T_f`` from H_k to H_m (h_m x h_k)."""
    measure = measure.with_mode(mode)
    exact = mode == "rational"
    top = max(m, k)
    if f.poly is None:
        blocks = _quadrature_blocks(f, measure, top, rtol)
        return blocks.get((m, k), np.zeros((dim_harmonic(f.n, m), dim_harmonic(f.n, k))))
    bases = _bases(f.n, top, mode)
    col = _exact_column(f.poly, k, [m], bases, measure, exact)
    if m in col:
        return col[m]
    out = np.empty((len(bases[m]), len(bases[k])), dtype=object if exact else float)
    out[...] = Surd(0) if exact else 0.0
    return out


# -- quadrature path ---------------------------------------------------------------

def _basis_values(n: int, M: int, pts: np.ndarray, mode: str = "float"):
    """Columns: sigma-orthonormal Y_i^(m) at sphere points, degree-major."""
    cols, degs = [], []
    for m in range(M + 1):
        b = build_block_basis(n, m, mode)
        for v, s in zip(b.vectors, b.sq_norms):
            cols.append(v.to_float().evaluate(pts) / sqrt(float(s)))
            degs.append(m)
    return np.column_stack(cols), np.array(degs)


def _quadrature_matrix(f: SymbolSpec, measure: RadialMeasure, M: int, order: int, nodes: int) -> np.ndarray:
    n = f.n
    spts, sw = sphere_rule(n, order)
    Y, degs = _basis_values(n, M, spts)
    r, w = measure.radial_rule(nodes)
    mom = np.array([float(measure.moment(m)) for m in degs])
    out = np.zeros((Y.shape[1], Y.shape[1]), dtype=complex)
    for rq, wq in zip(r, w):
        if wq == 0:
            continue
        vals = np.asarray(f.evaluate(rq * spts))
        Z = Y * rq ** degs[None, :]
        out += wq * (Z.T * (sw * vals)[None, :]) @ Z
    out /= np.sqrt(np.outer(mom, mom))
    return out.real if np.allclose(out.imag, 0, atol=1e-15) else out


def _quadrature_blocks(f: SymbolSpec, measure: RadialMeasure, M: int, rtol: float) -> dict:
    order, nodes = 2 * M + 16, M + 24
    prev = _quadrature_matrix(f, measure, M, order, nodes)
    for _ in range(5):
        order, nodes = order * 2, nodes * 2
        cur = _quadrature_matrix(f, measure, M, order, nodes)
        scale = max(np.max(np.abs(cur)), 1e-300)
        if np.max(np.abs(cur - prev)) <= rtol * scale:
            break
        prev = cur
    else:
        raise QuadratureError(f"Toeplitz quadrature for {f.label!r} did not reach rtol={rtol}")
    dims = [dim_harmonic(f.n, m) for m in range(M + 1)]
    off = np.concatenate([[0], np.cumsum(dims)])
    blocks = {}
    for m in range(M + 1):
        for k in range(M + 1):
            blk = cur[off[m]:off[m + 1], off[k]:off[k + 1]]
            if np.any(np.abs(blk) > 1e-15 * scale):
                blocks[(m, k)] = blk.copy()
    return blocks


# -- Hankel operators (Gram data) -----------------------------------------------------

@dataclass
class HankelOperator:
    """Per-degree Gram matrices ``<H_f e_j, H_f e_l>`` on each H_k."""

    n: int
    max_degree: int
    grams: dict
    mode: str
    symbol: str = ""
    measure: str = ""

    def gram(self, k: int) -> np.ndarray:
        return to_float_array(self.grams[k])

    def degree_norm(self, k: int) -> float:
        ev = np.linalg.eigvalsh(self.gram(k))
        return sqrt(max(float(ev[-1]), 0.0))

    def describe(self) -> str:
        return f"hankel[{self.symbol}]"


def _adjoint(a):
    if a.dtype == object:
        return a.T
    return a.conj().T


def assemble_hankel(f: SymbolSpec, measure: RadialMeasure, M: int, mode: str = "float") -> HankelOperator:
    """``G_k = T_{|f|^2}[k,k] - sum_m T_f[m,k]^* T_f[m,k]`` for polynomial ``f``."""
    _symbol_poly(f)
    T = assemble_toeplitz(f, measure, M, mode)
    T2 = assemble_toeplitz(f.conjugate() * f, measure, M, mode)
    exact = mode == "rational"
    grams = {}
    for k in range(M + 1):
        G = T2.exact_block(k, k) if exact else T2.block(k, k).copy()
        for m in range(T.row_max + 1):
            if (m, k) in T.blocks:
                B = T.exact_block(m, k) if exact else T.block(m, k)
                G = G - _adjoint(B).dot(B)
        grams[k] = G
    return HankelOperator(f.n, M, grams, mode, f.label, measure.describe())


# -- W and boundary multiplication ------------------------------------------------------

def _as_boundary_poly(fstar, n: int | None = None) -> Polynomial | None:
    if isinstance(fstar, Polynomial):
        return fstar
    if isinstance(fstar, SymbolSpec):
        return fstar.boundary_polynomial
    return None


def boundary_block(fstar, m: int, k: int, n: int, mode: str = "rational", rtol: float = 1e-9):
    """``int_S f* Y_j^(k) conj(Y_i^(m)) dsigma``: the (m, k) block of ``W* M_{f*} W``."""
    exact = mode == "rational"
    bm, bk = build_block_basis(n, m, mode), build_block_basis(n, k, mode)
    poly = _as_boundary_poly(fstar, n)
    if poly is not None:
        out = np.empty((len(bm), len(bk)), dtype=object if exact else float)
        for j, pj in enumerate(bk.vectors):
            g = poly * pj
            for i, pi in enumerate(bm.vectors):
                v = sphere_pairing(g, pi, m)
                if exact:
                    out[i, j] = Surd(v, 1 / (bm.sq_norms[i] * bk.sq_norms[j]))
                else:
                    out[i, j] = float(v) / sqrt(float(bm.sq_norms[i]) * float(bk.sq_norms[j]))
        return out
    fn = fstar.boundary_values if isinstance(fstar, SymbolSpec) else fstar
    order = m + k + 16
    prev = None
    for _ in range(6):
        pts, w = sphere_rule(n, order)
        vals = np.asarray(fn(pts))
        Ym, _ = _basis_values_block(n, m, pts)
        Yk, _ = _basis_values_block(n, k, pts)
        cur = (Ym.T * (w * vals)[None, :]) @ Yk
        if prev is not None and np.max(np.abs(cur - prev)) <= rtol * max(np.max(np.abs(cur)), 1e-300):
            return cur
        prev, order = cur, order * 2
    raise QuadratureError("boundary quadrature did not converge")


def _basis_values_block(n, m, pts):
    b = build_block_basis(n, m, "float")
    return np.column_stack([v.evaluate(pts) for v in b.elements]), m


def W_and_boundary_matrix(fstar, m: int, k: int, n: int, mode: str = "rational"):
    return boundary_block(fstar, m, k, n, mode)


def assemble_boundary(fstar, n: int, M: int, mode: str = "float", measure: str = "") -> BlockOperator:
    """``W* M_{f*} W`` in the b^2_nu-orthonormal basis (independent of the measure)."""
    poly = _as_boundary_poly(fstar, n)
    d = poly.degree if poly is not None and not poly.is_zero() else None
    row_max = M + d if d is not None else M
    blocks = {}
    for k in range(M + 1):
        if d is not None:
            rows = _coupled_rows(poly.homogeneous_parts(), k, row_max)
        else:
            rows = range(M + 1)
        for m in rows:
            blk = boundary_block(fstar, m, k, n, mode)
            if any((x != 0) for x in np.asarray(blk).flat):
                blocks[(m, k)] = blk
    label = repr(poly) if poly is not None else getattr(fstar, "label", "boundary")
    return BlockOperator(n, M, row_max, blocks, mode, "boundary", label, measure, d)


def w_block(m: int, measure: RadialMeasure, mode: str = "rational"):
    """Matrix of W on H_m: from ``e_j = Y_j/sqrt(mu(m))`` to the sigma-orthonormal ``Y_i``."""
    measure = measure.with_mode(mode)
    exact = mode == "rational"
    b = build_block_basis(measure.n, m, mode)
    mu = measure.moment(m)
    out = np.empty((len(b), len(b)), dtype=object if exact else float)
    for j, pj in enumerate(b.vectors):
        for i, pi in enumerate(b.vectors):
            ip = sphere_pairing(pj, pi, m)
            if exact:
                out[i, j] = Surd(1, mu) * Surd(ip, 1 / (b.sq_norms[j] * mu * b.sq_norms[i]))
            else:
                out[i, j] = sqrt(mu) * float(ip) / sqrt(float(b.sq_norms[j]) * mu * float(b.sq_norms[i]))
    return out


def w_norm_squared(u: Polynomial, measure: RadialMeasure):
    """``||W u||^2 = sum_m mu(m) ||u_m||_sigma^2`` for a harmonic polynomial ``u``."""
    _same_dim(measure, u)
    if not u.laplacian().is_zero():
        raise ValueError("W is defined on harmonic functions")
    table = SphereMomentTable(u.n)
    return sum((measure.moment(m) * table.inner(um, um) for m, um in u.homogeneous_parts().items()), 0)


# -- the reduction M_{x1} - W* M_{zeta1} W ------------------------------------------------

@dataclass(frozen=True)
class ReductionRow:
    m: int
    a1: float
    a1_bound: float
    a2: float
    a2_bound: float
    direct: float      # ||(M_x1 - W* M_zeta1 W)|H_m|| from T_{x1^2}, T_{x1} and the boundary blocks
    split: float       # same norm from the A1 and A2 Gram matrices


def a1_a2_block_norms(measure: RadialMeasure, m_max: int, mode: str = "float") -> list[ReductionRow]:
    """Per-degree norms of the two pieces of ``M_{x1} - W* M_{zeta1} W`` and their bounds.

    For ``p`` in H_m write ``x1 p = p_{m+1} + |x|^2 p_{m-1}``; then
    ``A1 p = (1 - sqrt(mu(m)/mu(m+1))) p_{m+1}`` and
    ``A2 p = (|x|^2 - sqrt(mu(m)/mu(m-1))) p_{m-1}``.
    """
    n = measure.n
    x1 = SymbolSpec.coordinate(n, 0)
    T = assemble_toeplitz(x1, measure, m_max, mode)
    T2 = assemble_toeplitz(x1 * x1, measure, m_max, mode)
    B = assemble_boundary(Polynomial.coordinate(n, 0, Fraction(1)), n, m_max, mode)
    mu = [float(measure.moment(k)) for k in range(m_max + 3)]
    rows = []
    for m in range(m_max + 1):
        ratio = mu[m] / mu[m + 1]
        c1 = abs(1 - sqrt(ratio))
        Pp = T.block(m + 1, m)
        a1 = c1 * float(np.linalg.norm(Pp, 2))
        a1_bound = sqrt(ratio) - 1
        G1 = c1 ** 2 * Pp.T @ Pp
        if m == 0:
            a2 = a2_bound = 0.0
            G2 = np.zeros_like(G1)
        else:
            K = mu[m + 1] + mu[m] - 2 * mu[m] ** 1.5 * mu[m - 1] ** -0.5
            K = max(K, 0.0)
            Pm = T.block(m - 1, m)
            s = sqrt(mu[m - 1]) / mu[m]
            a2 = sqrt(K) * s * float(np.linalg.norm(Pm, 2))
            a2_bound = sqrt(K / mu[m + 1])
            G2 = K * s ** 2 * Pm.T @ Pm
        S = np.vstack([T.block(j, m) for j in (m - 1, m + 1) if j >= 0])
        Bs = np.vstack([B.block(j, m) for j in (m - 1, m + 1) if j >= 0])
        GD = T2.block(m, m) - S.T @ Bs - Bs.T @ S + Bs.T @ Bs
        direct = sqrt(max(float(np.linalg.eigvalsh((GD + GD.T) / 2)[-1]), 0.0))
        split = sqrt(max(float(np.linalg.eigvalsh(G1 + G2)[-1]), 0.0))
        rows.append(ReductionRow(m, a1, a1_bound, a2, a2_bound, direct, split))
    return rows


def reduction_cross_gram(measure: RadialMeasure, m_max: int) -> int:
    """Count of nonzero sphere pairings between the ``p_{m+1}`` (resp. ``p_{m-1}``)
    components coming from different degrees; zero means the images of distinct
    blocks under A1 and A2 are orthogonal.  Exact arithmetic."""
    n = measure.n
    x1 = Polynomial.coordinate(n, 0, Fraction(1))
    table = SphereMomentTable(n)
    plus, minus = {}, {}
    for m in range(m_max + 1):
        for v in build_block_basis(n, m).vectors:
            comps = harmonic_decompose(x1 * v, m + 1)
            plus.setdefault(m, []).append(comps[0])
            if m >= 1:
                minus.setdefault(m, []).append(comps[1])
    bad = 0
    for images in (plus, minus):
        degs = sorted(images)
        for a in degs:
            for b in degs:
                if a < b:
                    bad += sum(1 for p in images[a] for q in images[b] if table.inner(p, q) != 0)
    return bad


def multiplication_norm_identity(p: Polynomial, measure: RadialMeasure, coordinate: int = 0):
    """Both sides of ``||x1 p||^2 = ||p_{m+1}||^2 + mu(m+1)/mu(m-1) ||p_{m-1}||^2``."""
    _same_dim(measure, p)
    m = p.homogeneous_degree
    if m is None or not p.laplacian().is_zero():
        raise ValueError("p must be a nonzero homogeneous harmonic polynomial")
    fp = Polynomial.coordinate(p.n, coordinate, Fraction(1)) * p
    comps = harmonic_decompose(fp, m + 1)
    lhs = bergman_inner_product(fp, fp, measure)
    rhs = bergman_inner_product(comps[0], comps[0], measure)
    if m >= 1:
        rhs += measure.moment(m + 1) / measure.moment(m - 1) * bergman_inner_product(comps[1], comps[1], measure)
    return lhs, rhs


# -- reproducing kernel diagonal ----------------------------------------------------------

@dataclass(frozen=True)
class KernelDiagonal:
    """Truncated ``R(x, x) = sum_{m <= M} d_m |x|^{2m}`` with ``d_m = h_m / mu(m)``."""

    measure: RadialMeasure
    M: int
    coefficients: tuple

    @classmethod
    def build(cls, measure: RadialMeasure, M: int) -> KernelDiagonal:
        return cls(measure, M, tuple(dim_harmonic(measure.n, m) / measure.moment(m) for m in range(M + 1)))

    def __call__(self, t):
        """Partial sum at ``t = |x|^2`` (scalar or array)."""
        if isinstance(t, np.ndarray):
            out = np.zeros_like(t, dtype=float)
            for c in reversed(self.coefficients):
                out = out * t + float(c)
            return out
        out = 0
        for c in reversed(self.coefficients):
            out = out * t + c
        return out

    def sup_root(self, r) -> float:
        """``sup_{|x| <= r} R(x,x)^{1/2}``: the point-evaluation bound on the ball of radius r."""
        return sqrt(float(self(r * r)))


def kernel_diagonal(measure: RadialMeasure, x, M: int):
    """Truncated ``R(x, x)`` at a point ``x`` (sequence of coordinates) or radius."""
    if np.ndim(x) == 0:
        t = x * x
    else:
        t = sum(c * c for c in x)
    if t >= 1:
        raise ValueError("the point must lie in the open unit ball")
    return KernelDiagonal.build(measure, M)(t)


def hs_norm_truncated_multiplication(f: SymbolSpec, r, measure: RadialMeasure, M: int,
                                     method: str = "integral", rtol: float = 1e-10) -> float:
    """``sum_j ||f chi_{B_r} e_j||^2`` over degrees ``<= M``.

    ``method="integral"`` integrates ``|f|^2 R_M(x,x)`` over the ball of radius
    r by sphere x radial quadrature; ``method="basis"`` sums the squared norms
    element by element using exact sphere integrals and truncated moments.
    """
    if not 0 < float(r) < 1:
        raise ValueError("cutoff radius must lie in (0, 1)")
    if method == "integral":
        return _hs_integral(f, float(r), measure, M, rtol)
    if method == "basis":
        return _hs_basis(f, r, measure, M)
    raise ValueError(f"unknown method {method!r}")


def _hs_integral(f, r, measure, M, rtol):
    kern = KernelDiagonal.build(measure, M)
    n = measure.n

    def shell(rho, order):
        pts, w = sphere_rule(n, order)
        out = np.empty(len(rho))
        for i, s in enumerate(rho):
            out[i] = float(np.dot(w, np.abs(f.evaluate(s * pts)) ** 2))
        return out

    deg = f.degree if f.degree is not None else 32
    order = 2 * max(deg, 0) + 8
    if measure.kind != "jacobi":
        rho = np.array([float(s) for s, _ in measure.atoms])
        w = np.array([float(v) for _, v in measure.atoms])
        keep = rho <= r
        rho, w = rho[keep], w[keep]
        return float(np.dot(w, shell(rho, order) * kern(rho ** 2)))
    from scipy import special

    a, half = float(measure.alpha), n / 2
    c = 2 / special.beta(half, a + 1)
    prev = None
    N = M + 32
    for _ in range(6):
        x, w = special.roots_legendre(N)
        rho = r * (x + 1) / 2
        dens = c * (1 - rho ** 2) ** a * rho ** (n - 1) * r / 2
        cur = float(np.dot(w * dens, shell(rho, order) * kern(rho ** 2)))
        if prev is not None and abs(cur - prev) <= rtol * max(abs(cur), 1e-300):
            return cur
        prev, N, order = cur, N * 2, order if f.poly is not None else order * 2
    raise QuadratureError("Hilbert-Schmidt integral did not converge")


def _hs_basis(f, r, measure, M):
    n = measure.n
    if f.poly is None:
        raise ValueError("the basis method needs a polynomial symbol; use method='integral'")
    table = SphereMomentTable(n)
    if isinstance(r, float):
        r = Fraction(str(r))
    total = 0
    for m in range(M + 1):
        b = build_block_basis(n, m)
        for v, s in zip(b.vectors, b.sq_norms):
            g = f.poly * v
            parts = g.homogeneous_parts()
            acc = 0
            for a, ga in parts.items():
                for c, gc in parts.items():
                    if (a + c) % 2:
                        continue
                    ip = table.inner(ga, gc)
                    if ip != 0:
                        acc += measure.truncated_moment((a + c) // 2, r) * ip
            total += acc / (s * measure.moment(m))
    return float(total)
