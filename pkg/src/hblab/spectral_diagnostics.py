"""Diagnostics on assembled operators: finite-section spectra, essential norm
surrogates, block-norm decay certificates, commutators and limit tests."""
from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import ceil

import numpy as np
from scipy.spatial.distance import cdist

from .bergman_operator import BlockOperator, assemble_toeplitz, bergman_inner_product
from .harmonic_basis import SphereMomentTable, dim_harmonic
from .polynomial import Polynomial, monomials
from .quadrature import boundary_samples, sphere_rule
from .radial_measure import QuadratureError, RadialMeasure
from .symbols import SymbolSpec, extend_boundary_symbol

__all__ = [
    "SectionSpectrum", "DecayCertificate", "finite_section_spectrum", "essential_norm_estimate",
    "block_norm_decay", "commutator_decay", "compactness_limit_test", "radial_limit_test",
    "extend_boundary_symbol", "hausdorff_distance", "write_report_json", "write_degree_csv",
]


def max_workers() -> int:
    try:
        return max(1, int(os.environ.get("HBLAB_THREADS", "0")) or os.cpu_count() or 1)
    except ValueError:
        return 1


def hausdorff_distance(a, b) -> float:
    """Hausdorff distance between two finite point sets in the complex plane."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size == 0 or b.size == 0:
        return float("inf")
    d = cdist(np.column_stack([a.real, a.imag]), np.column_stack([b.real, b.imag]))
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


# -- finite sections ------------------------------------------------------------------

@dataclass
class SectionSpectrum:
    window: tuple[int, int]
    eigenvalues: np.ndarray
    hermitian: bool
    boundary_sample: np.ndarray | None = None
    hausdorff: float | None = None

    def to_json(self, operator: str = "") -> dict:
        ev = self.eigenvalues
        if np.iscomplexobj(ev):
            vals = [[float(z.real), float(z.imag)] for z in ev]
        else:
            vals = [float(x) for x in ev]
        return {"operator": operator, "window": list(self.window), "eigenvalues": vals,
                "hausdorff": self.hausdorff}


def finite_section_spectrum(op: BlockOperator, M0: int, M: int, symbol: SymbolSpec | None = None,
                            samples: np.ndarray | None = None) -> SectionSpectrum:
    """Eigenvalues of the compression of ``op`` to ``H_{M0} + ... + H_M``.

    With a symbol (or explicit boundary samples) the Hausdorff distance between
    the spectrum and the sampled boundary range is reported.
    """
    if not 0 <= M0 <= M <= op.max_degree:
        raise ValueError(f"window [{M0}, {M}] outside assembled degrees 0..{op.max_degree}")
    A = op.dense(M0, M)
    herm = bool(np.allclose(A, A.conj().T, atol=1e-12, rtol=0))
    try:
        ev = np.linalg.eigvalsh((A + A.conj().T) / 2) if herm else np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise QuadratureError(f"eigensolver failed on window [{M0}, {M}]: {exc}") from exc
    if not herm:
        ev = ev[np.lexsort((ev.imag, ev.real))]
    if samples is None and symbol is not None:
        samples = np.asarray(symbol.boundary_values(boundary_samples(op.n)))
    hd = hausdorff_distance(ev, samples) if samples is not None else None
    return SectionSpectrum((M0, M), ev, herm, samples, hd)


def essential_norm_estimate(op: BlockOperator, M0: int | None = None, M: int | None = None) -> float:
    """Largest singular value of the tail compression on degrees ``M0..M``.

    ``M0`` defaults to ``ceil(M / 2)``.
    """
    M = op.max_degree if M is None else M
    M0 = ceil(M / 2) if M0 is None else M0
    A = op.dense(M0, M)
    return float(np.linalg.norm(A, 2)) if A.size else 0.0


# -- decay certificates -------------------------------------------------------------------

def tail_start(m_max: int) -> int:
    """First degree of the last quarter of ``0..m_max`` (those with ``4m > 3 m_max``)."""
    return 3 * m_max // 4 + 1


@dataclass
class DecayCertificate:
    """Per-degree norms with a monotone envelope and a verdict.

    ``envelope[i] = max(norms[i:])``; the verdict is ``decaying`` when the
    largest norm over the last quarter of degrees is below ``tau``.
    """

    operator: str
    degrees: list[int]
    norms: list[float]
    tau: float
    envelope: list[float] = field(default_factory=list)
    rate: float | None = None
    tail_max: float = 0.0
    decaying: bool = False

    @classmethod
    def from_norms(cls, operator: str, degrees, norms, tau: float) -> DecayCertificate:
        degrees = [int(m) for m in degrees]
        norms = [max(float(x), 0.0) for x in norms]
        env, run = [], 0.0
        for x in reversed(norms):
            run = max(run, x)
            env.append(run)
        env.reverse()
        m_max = degrees[-1] if degrees else 0
        start = tail_start(m_max)
        tail = [x for m, x in zip(degrees, norms) if m >= start]
        tail_max = max(tail) if tail else 0.0
        rate = None
        pts = [(m, e) for m, e in zip(degrees, env) if m >= max(1, m_max // 2) and e > 0]
        if len(pts) >= 2:
            xs, ys = np.log([p[0] for p in pts]), np.log([p[1] for p in pts])
            rate = float(np.polyfit(xs, ys, 1)[0])
        return cls(operator, degrees, norms, tau, env, rate, tail_max, tail_max < tau)

    @property
    def verdict(self) -> str:
        return "decaying" if self.decaying else "not-decaying"

    def recheck(self) -> bool:
        """Recompute the verdict from the stored sequence."""
        return DecayCertificate.from_norms(self.operator, self.degrees, self.norms, self.tau).decaying

    def to_json(self) -> dict:
        d = asdict(self)
        d["verdict"] = self.verdict
        return d


def block_norm_decay(op, m_max: int | None = None, tau: float = 1e-2) -> DecayCertificate:
    """Certificate from ``||op restricted to H_m||`` for ``m = 0..m_max``.

    ``op`` is anything with ``degree_norm(m)`` and ``describe()``, e.g. a
    Toeplitz :class:`BlockOperator` or a Hankel Gram operator.
    """
    m_max = op.max_degree if m_max is None else m_max
    if m_max > op.max_degree:
        raise ValueError("m_max exceeds the assembled degree")
    degrees = list(range(m_max + 1))
    with ThreadPoolExecutor(max_workers()) as pool:
        norms = list(pool.map(op.degree_norm, degrees))
    return DecayCertificate.from_norms(op.describe(), degrees, norms, tau)


def _square(op: BlockOperator) -> np.ndarray:
    return op.dense(0, op.max_degree)


def _column_norms(A: np.ndarray, n: int, k_max: int) -> list[float]:
    out, pos = [], 0
    for k in range(k_max + 1):
        h = dim_harmonic(n, k)
        out.append(float(np.linalg.norm(A[:, pos:pos + h], 2)))
        pos += h
    return out


def commutator_decay(f: SymbolSpec, g: SymbolSpec, measure: RadialMeasure, M: int, tau: float = 1e-2,
                     mode: str = "float") -> tuple[DecayCertificate, DecayCertificate]:
    """Certificates for ``[T_f, T_g]`` and ``T_{gf} - T_g T_f`` on degrees ``m <= M - deg f - deg g``.

    On those columns the products of the degree-``0..M`` sections agree with
    the full operators, so no truncation error enters.
    """
    if f.poly is None or g.poly is None:
        raise ValueError("commutator_decay needs polynomial symbols")
    df = 0 if f.poly.is_zero() else f.poly.degree
    dg = 0 if g.poly.is_zero() else g.poly.degree
    k_max = M - df - dg
    if k_max < 0:
        raise ValueError(f"window M={M} too small for bandwidths {df} + {dg}")
    Tf = _square(assemble_toeplitz(f, measure, M, mode))
    Tg = _square(assemble_toeplitz(g, measure, M, mode))
    Tgf = _square(assemble_toeplitz(g * f, measure, M, mode))
    comm = _column_norms(Tf @ Tg - Tg @ Tf, f.n, k_max)
    semi = _column_norms(Tgf - Tg @ Tf, f.n, k_max)
    degs = list(range(k_max + 1))
    return (DecayCertificate.from_norms(f"[T_{f.label}, T_{g.label}]", degs, comm, tau),
            DecayCertificate.from_norms(f"T_({g.label})({f.label}) - T_{g.label} T_{f.label}", degs, semi, tau))


# -- limit tests -----------------------------------------------------------------------------

def compactness_limit_test(f: SymbolSpec, measure: RadialMeasure, m_max: int, family=None,
                           rtol: float = 1e-10) -> list:
    """The sequence ``s_m = int f phi_m dnu / int phi_m dnu`` for ``m = 0..m_max``.

    The default family is ``phi_m = |x|^{2m}``; then ``s_m`` is the radial
    average of the sphere means of f weighted by ``r^{2m}``.  ``family`` may be
    a callable ``m -> [a_1, ..., a_J]`` of harmonic polynomials, giving
    ``phi_m = sum_j |a_j|^2``.  Exact for polynomial symbols.
    """
    if family is not None:
        if f.poly is None:
            raise ValueError("custom families need a polynomial symbol")
        out = []
        for m in range(m_max + 1):
            num = den = 0
            for a in family(m):
                num += bergman_inner_product(f.poly * a, a, measure)
                den += bergman_inner_product(a, a, measure)
            out.append(num / den)
        return out
    if f.poly is not None:
        table = SphereMomentTable(f.n)
        means = {d // 2: table.integrate(p) for d, p in f.poly.homogeneous_parts().items() if d % 2 == 0}
        return [sum((c * measure.moment(m + j) for j, c in means.items()), 0) / measure.moment(m)
                for m in range(m_max + 1)]
    return _limit_quadrature(f, measure, m_max, rtol)


def _limit_quadrature(f, measure, m_max, rtol):
    order, nodes = 32, 2 * m_max + 32
    prev = None
    for _ in range(6):
        pts, w = sphere_rule(f.n, order)
        r, wr = measure.radial_rule(nodes)
        means = np.array([np.dot(w, f.evaluate(s * pts)) for s in r])
        cur = np.array([np.dot(wr, means * r ** (2 * m)) / float(measure.moment(m)) for m in range(m_max + 1)])
        if prev is not None and np.max(np.abs(cur - prev)) <= rtol * max(np.max(np.abs(cur)), 1.0):
            return [complex(x) if np.iscomplexobj(cur) else float(x) for x in cur]
        prev, order, nodes = cur, order * 2, nodes * 2
    raise QuadratureError(f"limit-test quadrature for {f.label!r} did not converge")


def radial_limit_test(f: SymbolSpec, A: int, rtol: float = 1e-10) -> dict:
    """``{alpha: int_S f* zeta^alpha dsigma}`` for all multi-indices with ``|alpha| <= A``.

    Exact when the boundary data is a polynomial.
    """
    n = f.n
    alphas = [a for d in range(A + 1) for a in monomials(n, d)]
    if f.kind == "boundary" and f.boundary is None:
        raise ValueError("symbol has no boundary data")
    bp = f.boundary_polynomial
    if bp is not None:
        table = SphereMomentTable(n)
        return {a: table.integrate(bp * Polynomial.monomial(a, Fraction(1))) for a in alphas}
    order = A + 32
    prev = None
    for _ in range(6):
        pts, w = sphere_rule(n, order)
        vals = np.asarray(f.boundary_values(pts))
        cur = np.array([np.dot(w, vals * np.prod(pts ** np.array(a), axis=1)) for a in alphas])
        if prev is not None and np.max(np.abs(cur - prev)) <= rtol * max(np.max(np.abs(cur)), 1.0):
            return {a: (complex(v) if np.iscomplexobj(cur) else float(v)) for a, v in zip(alphas, cur)}
        prev, order = cur, order * 2
    raise QuadratureError("boundary moment quadrature did not converge")


# -- reports -------------------------------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, Fraction):
        return float(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def write_report_json(path, report: dict) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(report), fh, indent=1, sort_keys=True)
        fh.write("\n")


def _fmt(x) -> str:
    if x is None or x == "":
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, complex):
        return f"{x.real:.17g}{x.imag:+.17g}j"
    return f"{float(x):.17g}"


def format_degree_csv(rows) -> str:
    """CSV text with columns ``m, norm, bound, s_m``; ``rows`` are dicts or tuples."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m", "norm", "bound", "s_m"])
    for row in rows:
        if isinstance(row, dict):
            row = (row.get("m"), row.get("norm"), row.get("bound"), row.get("s_m"))
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_degree_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(format_degree_csv(rows))
