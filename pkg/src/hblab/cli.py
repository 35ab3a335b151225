"""Config-driven experiment runner.

    hblab run --config exp.json [--mode rational|float] [--out DIR] [--measure JSON]
    hblab describe --config exp.json
    hblab validate --config exp.json

Exit status: 0 success, 2 invalid config, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil

import numpy as np

from . import __version__
from .bergman_operator import (
    KernelDiagonal,
    assemble_hankel,
    assemble_toeplitz,
    hs_norm_truncated_multiplication,
)
from .harmonic_basis import BASIS_CONVENTION, IllConditionedBasis, dim_harmonic
from .polynomial import Polynomial
from .radial_measure import QuadratureError, RadialMeasure
from .spectral_diagnostics import (
    block_norm_decay,
    commutator_decay,
    compactness_limit_test,
    finite_section_spectrum,
    essential_norm_estimate,
    format_degree_csv,
    max_workers,
    radial_limit_test,
    write_report_json,
)
from .symbols import SymbolSpec, extend_boundary_symbol

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
DIAGNOSTICS = ("spectrum", "decay", "commutator", "limits", "kernel", "hs", "radial-limit")
SYMBOL_KINDS = ("polynomial", "radial", "continuous", "boundary")


class ConfigError(ValueError):
    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer}: {message}")
        self.pointer = pointer
        self.message = message


# -- config ----------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    n: int
    measure: dict
    symbols: list
    M: int
    mode: str = "float"
    diagnostics: list = field(default_factory=list)
    output: str = "hblab-out"

    def to_json(self) -> dict:
        return {"n": self.n, "measure": self.measure, "symbols": self.symbols, "M": self.M,
                "mode": self.mode, "diagnostics": self.diagnostics, "output": self.output}

    def canonical(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True) + "\n"

    def sha256(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    @classmethod
    def from_json(cls, data: dict, min_degree: int = 1) -> ExperimentConfig:
        """Validate a decoded config; errors carry a JSON pointer to the field."""
        if not isinstance(data, dict):
            raise ConfigError("/", "config must be a JSON object")
        for key in ("n", "measure", "M"):
            if key not in data:
                raise ConfigError(f"/{key}", "required field is missing")
        unknown = set(data) - {"n", "measure", "symbols", "M", "mode", "diagnostics", "output"}
        if unknown:
            raise ConfigError(f"/{sorted(unknown)[0]}", "unknown field")
        n, M = data["n"], data["M"]
        if not isinstance(n, int) or isinstance(n, bool) or n < 2:
            raise ConfigError("/n", f"dimension must be an integer >= 2, got {n!r}")
        if not isinstance(M, int) or isinstance(M, bool) or M < min_degree:
            raise ConfigError("/M", f"max degree must be an integer >= {min_degree}, got {M!r}")
        mode = data.get("mode", "float")
        if mode not in ("rational", "float"):
            raise ConfigError("/mode", f"expected 'rational' or 'float', got {mode!r}")
        measure = data["measure"]
        try:
            m = build_measure(measure, n)
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError("/measure", str(exc)) from None
        if mode == "rational" and not m.exact:
            raise ConfigError("/measure", "rational mode needs exact measure data (use strings or integers)")
        symbols = data.get("symbols", [])
        if not isinstance(symbols, list):
            raise ConfigError("/symbols", "expected a list")
        names = set()
        for i, s in enumerate(symbols):
            ptr = f"/symbols/{i}"
            if not isinstance(s, dict) or not isinstance(s.get("name"), str):
                raise ConfigError(f"{ptr}/name", "each symbol needs a string name")
            if s["name"] in names:
                raise ConfigError(f"{ptr}/name", f"duplicate symbol name {s['name']!r}")
            names.add(s["name"])
            try:
                build_symbol(s, n)
            except ConfigError as exc:
                raise ConfigError(ptr + exc.pointer, exc.message) from None
            except (ValueError, TypeError, SyntaxError) as exc:
                raise ConfigError(ptr, str(exc)) from None
        diags = data.get("diagnostics", [])
        if not isinstance(diags, list):
            raise ConfigError("/diagnostics", "expected a list")
        for i, d in enumerate(diags):
            _check_diagnostic(d, f"/diagnostics/{i}", names, symbols, M)
        output = data.get("output", "hblab-out")
        if not isinstance(output, str):
            raise ConfigError("/output", "expected a directory path")
        return cls(n, measure, symbols, M, mode, diags, output)


def _check_diagnostic(d, ptr, names, symbols, M):
    if not isinstance(d, dict) or d.get("type") not in DIAGNOSTICS:
        raise ConfigError(f"{ptr}/type", f"expected one of {', '.join(DIAGNOSTICS)}")
    kind = d["type"]
    refs = d.get("symbols", [d["symbol"]] if "symbol" in d else [])
    if kind == "commutator" and len(refs) != 2:
        raise ConfigError(f"{ptr}/symbols", "commutator needs exactly two symbols")
    if kind not in ("kernel",) and not refs:
        raise ConfigError(f"{ptr}/symbol", "diagnostic must reference a declared symbol")
    for r in refs:
        if r not in names:
            raise ConfigError(f"{ptr}/symbol", f"undeclared symbol {r!r}")
    kinds = {s["name"]: s.get("kind", "polynomial") for s in symbols}
    if kind in ("commutator",) or (kind == "decay" and d.get("operator") == "hankel"):
        for r in refs:
            if kinds[r] not in ("polynomial", "radial"):
                raise ConfigError(f"{ptr}/symbol", f"{kind} needs polynomial symbols")
    if "window" in d:
        w = d["window"]
        if not (isinstance(w, list) and len(w) == 2 and all(isinstance(x, int) for x in w) and 0 <= w[0] <= w[1] <= M):
            raise ConfigError(f"{ptr}/window", f"window must be [M0, M1] with 0 <= M0 <= M1 <= {M}")
    if "radius" in d:
        try:
            ok = not isinstance(d["radius"], bool) and 0 < Fraction(str(d["radius"])) < 1
        except (ValueError, ZeroDivisionError):
            ok = False
        if not ok:
            raise ConfigError(f"{ptr}/radius", "radius must be a number in (0, 1)")
    if kind in ("kernel", "hs") and "radius" not in d:
        raise ConfigError(f"{ptr}/radius", "required field is missing")


def build_measure(spec: dict, n: int) -> RadialMeasure:
    if not isinstance(spec, dict):
        raise ValueError("measure must be an object")
    spec = dict(spec)
    if int(spec.setdefault("n", n)) != n:
        raise ValueError("measure dimension differs from n")
    return RadialMeasure.from_json(spec)


def _variables(n: int):
    import sympy

    return sympy.symbols(" ".join(f"x{i + 1}" for i in range(n)), real=True)


def parse_polynomial(expr: str, n: int) -> Polynomial:
    """Exact polynomial from a sympy expression in ``x1..xn``."""
    import sympy

    xs = _variables(n)
    loc = {str(x): x for x in xs}
    e = sympy.sympify(expr, locals=loc)
    extra = e.free_symbols - set(xs)
    if extra:
        raise ConfigError("/expr", f"unknown variables {sorted(map(str, extra))}")
    try:
        P = sympy.Poly(sympy.expand(e), *xs)
    except sympy.PolynomialError as exc:
        raise ConfigError("/expr", f"not a polynomial: {exc}") from None
    terms = {}
    for alpha, c in P.terms():
        c = sympy.nsimplify(c)
        if not c.is_Rational:
            raise ConfigError("/expr", f"coefficient {c} is not rational")
        terms[tuple(int(a) for a in alpha)] = Fraction(int(c.p), int(c.q))
    return Polynomial(n, terms)


def _lambdify(expr: str, n: int):
    import sympy

    xs = _variables(n)
    e = sympy.sympify(expr, locals={str(x): x for x in xs})
    extra = e.free_symbols - set(xs)
    if extra:
        raise ConfigError("/expr", f"unknown variables {sorted(map(str, extra))}")
    fn = sympy.lambdify(xs, e, "numpy")

    def call(points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.broadcast_to(np.asarray(fn(*pts.T)), (pts.shape[0],)).copy()

    return call


def build_symbol(spec: dict, n: int) -> SymbolSpec:
    kind = spec.get("kind", "polynomial")
    name = spec.get("name", "")
    if kind not in SYMBOL_KINDS:
        raise ConfigError("/kind", f"expected one of {', '.join(SYMBOL_KINDS)}")
    if kind == "polynomial":
        if "terms" in spec:
            p = Polynomial(n, {tuple(t["alpha"]): Fraction(str(t["coef"])) for t in spec["terms"]})
        elif "expr" in spec:
            p = parse_polynomial(str(spec["expr"]), n)
        else:
            raise ConfigError("/expr", "polynomial symbol needs 'expr' or 'terms'")
        return SymbolSpec.polynomial(p, label=name)
    if kind == "radial":
        if "coeffs" not in spec:
            raise ConfigError("/coeffs", "radial symbol needs coefficients in r^2")
        return SymbolSpec.radial([Fraction(str(c)) for c in spec["coeffs"]], n, label=name)
    if "expr" not in spec:
        raise ConfigError("/expr", f"{kind} symbol needs 'expr'")
    if kind == "continuous":
        b = _lambdify(str(spec["boundary"]), n) if "boundary" in spec else None
        return SymbolSpec.continuous(_lambdify(str(spec["expr"]), n), n, b, label=name)
    try:
        fstar = parse_polynomial(str(spec["expr"]), n)
    except ConfigError:
        fstar = _lambdify(str(spec["expr"]), n)
    return extend_boundary_symbol(fstar, n, label=name)


# -- planning ------------------------------------------------------------------------

def plan(config: ExperimentConfig) -> dict:
    """Sizes implied by a config (no operator assembly).  Accepts ``M = 0``."""
    n, M = config.n, config.M
    dims = [dim_harmonic(n, m) for m in range(M + 1)]
    symbols = []
    for s in config.symbols:
        sym = build_symbol(s, n)
        d = sym.degree if sym.poly is not None and not sym.poly.is_zero() else None
        if d is None:
            blocks = (M + 1) ** 2 if sym.poly is None else 0
            rows = M
        else:
            rows = M + d
            blocks = sum(1 for k in range(M + 1) for m in range(max(0, k - d), rows + 1)
                         if abs(m - k) <= d and (m + k + d) % 2 == 0)
        row_size = sum(dim_harmonic(n, m) for m in range(rows + 1))
        symbols.append({"name": s["name"], "bandwidth": d, "blocks": blocks,
                        "matrix_shape": [row_size, sum(dims)]})
    return {"n": n, "M": M, "degrees": list(range(M + 1)), "block_sizes": dims,
            "total_size": sum(dims), "symbols": symbols, "diagnostics": [d["type"] for d in config.diagnostics]}


def format_plan(p: dict) -> str:
    lines = [f"dimension n = {p['n']}, degrees 0..{p['M']}",
             f"block sizes h_m: {p['block_sizes']}",
             f"total basis size: {p['total_size']}"]
    for s in p["symbols"]:
        band = "dense (quadrature)" if s["bandwidth"] is None else f"bandwidth {s['bandwidth']}"
        lines.append(f"symbol {s['name']}: {band}, {s['blocks']} blocks, "
                     f"matrix {s['matrix_shape'][0]} x {s['matrix_shape'][1]}")
    lines.append("diagnostics: " + (", ".join(p["diagnostics"]) or "none"))
    return "\n".join(lines)


# -- running -------------------------------------------------------------------------

class Runner:
    def __init__(self, config: ExperimentConfig, out: str):
        self.config = config
        self.out = out
        self.mode = config.mode
        self.measure = build_measure(config.measure, config.n).with_mode(config.mode)
        self.symbols = {s["name"]: build_symbol(s, config.n) for s in config.symbols}
        self._toeplitz: dict = {}

    def toeplitz(self, name: str):
        if name not in self._toeplitz:
            self._toeplitz[name] = assemble_toeplitz(self.symbols[name], self.measure, self.config.M, self.mode)
        return self._toeplitz[name]

    def run_one(self, index: int, d: dict) -> tuple[dict, dict]:
        """Returns ``(report entry, {filename: text})``."""
        kind = d["type"]
        tag = f"{index:02d}_{kind}"
        M = self.config.M
        if kind == "spectrum":
            name = d["symbol"]
            M0, M1 = d.get("window", [ceil(M / 2), M])
            sp = finite_section_spectrum(self.toeplitz(name), M0, M1, self.symbols[name])
            ess = essential_norm_estimate(self.toeplitz(name), M0, M1)
            entry = sp.to_json(f"T[{name}]")
            entry.update({"essential_norm": ess, "verdicts": {"hermitian": sp.hermitian}})
            lines = ["index,real,imag"] + [f"{i},{complex(z).real:.17g},{complex(z).imag:.17g}"
                                          for i, z in enumerate(sp.eigenvalues)]
            return entry, {f"{tag}_{name}.csv": "\n".join(lines) + "\n"}
        if kind == "decay":
            name = d["symbol"]
            tau = float(d.get("tau", 1e-2))
            if d.get("operator", "toeplitz") == "hankel":
                op = assemble_hankel(self.symbols[name], self.measure, M, self.mode)
            else:
                op = self.toeplitz(name)
            cert = block_norm_decay(op, M, tau)
            rows = [(m, x, None, None) for m, x in zip(cert.degrees, cert.norms)]
            return ({"operator": cert.operator, "window": [0, M], "verdicts": {"decay": cert.verdict},
                     "certificate": cert.to_json()}, {f"{tag}_{name}.csv": format_degree_csv(rows)})
        if kind == "commutator":
            a, b = d["symbols"]
            tau = float(d.get("tau", 1e-2))
            c1, c2 = commutator_decay(self.symbols[a], self.symbols[b], self.measure, M, tau, "float")
            files = {f"{tag}_{a}_{b}_commutator.csv": format_degree_csv([(m, x, None, None) for m, x in zip(c1.degrees, c1.norms)]),
                     f"{tag}_{a}_{b}_semicommutator.csv": format_degree_csv([(m, x, None, None) for m, x in zip(c2.degrees, c2.norms)])}
            return ({"operator": f"[{a},{b}]", "window": [0, c1.degrees[-1]],
                     "verdicts": {"commutator": c1.verdict, "semicommutator": c2.verdict},
                     "certificates": [c1.to_json(), c2.to_json()]}, files)
        if kind == "limits":
            name = d["symbol"]
            s = compactness_limit_test(self.symbols[name], self.measure, int(d.get("m_max", M)))
            rows = [(m, None, None, v) for m, v in enumerate(s)]
            return ({"operator": f"limit[{name}]", "s_m": s}, {f"{tag}_{name}.csv": format_degree_csv(rows)})
        if kind == "kernel":
            r = float(Fraction(str(d["radius"])))
            kd = KernelDiagonal.build(self.measure, M)
            partial, acc = [], 0.0
            for m, c in enumerate(kd.coefficients):
                acc += float(c) * r ** (2 * m)
                partial.append(acc)
            rows = [(m, v, None, None) for m, v in enumerate(partial)]
            return ({"operator": "kernel-diagonal", "radius": r, "value": partial[-1],
                     "C_K": kd.sup_root(r)}, {f"{tag}.csv": format_degree_csv(rows)})
        if kind == "hs":
            name = d["symbol"]
            r = d["radius"]
            sym = self.symbols[name]
            integral = hs_norm_truncated_multiplication(sym, float(Fraction(str(r))), self.measure, M, "integral")
            entry = {"operator": f"hs[{name}]", "radius": float(Fraction(str(r))), "integral": integral}
            basis = None
            if sym.poly is not None:
                basis = hs_norm_truncated_multiplication(sym, Fraction(str(r)), self.measure, M, "basis")
                entry["basis"] = basis
            return entry, {f"{tag}_{name}.csv": format_degree_csv([(M, integral, basis, None)])}
        # radial-limit
        name = d["symbol"]
        A = int(d.get("order", 4))
        table = radial_limit_test(self.symbols[name], A)
        lines = ["alpha,value"] + [f"{' '.join(map(str, a))},{float(v):.17g}" for a, v in table.items()]
        nonzero = any(abs(complex(v)) > 1e-9 for v in table.values())
        return ({"operator": f"radial-limit[{name}]", "table": {" ".join(map(str, a)): v for a, v in table.items()},
                 "verdicts": {"boundary_nonzero": nonzero}}, {f"{tag}_{name}.csv": "\n".join(lines) + "\n"})

    def run(self) -> int:
        os.makedirs(self.out, exist_ok=True)
        config_text = self.config.canonical()
        with open(os.path.join(self.out, "config.json"), "w") as fh:
            fh.write(config_text)
        # assemble shared operators first so concurrent diagnostics only read them
        for d in self.config.diagnostics:
            if d["type"] in ("spectrum",) or (d["type"] == "decay" and d.get("operator", "toeplitz") == "toeplitz"):
                try:
                    self.toeplitz(d["symbol"])
                except (QuadratureError, IllConditionedBasis, ArithmeticError):
                    pass  # reported again by the diagnostic itself
        report, failures, files = {"diagnostics": []}, [], []

        def job(item):
            i, d = item
            try:
                return i, self.run_one(i, d), None
            except (QuadratureError, IllConditionedBasis, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
                return i, None, f"{type(exc).__name__}: {exc}"

        with ThreadPoolExecutor(max_workers()) as pool:
            results = list(pool.map(job, enumerate(self.config.diagnostics)))
        for i, res, err in results:
            d = self.config.diagnostics[i]
            if err is not None:
                failures.append({"index": i, "type": d["type"], "error": err})
                report["diagnostics"].append({"type": d["type"], "status": "failed", "error": err})
                continue
            entry, outputs = res
            entry = {"type": d["type"], "status": "ok", **entry}
            report["diagnostics"].append(entry)
            for fname, text in outputs.items():
                with open(os.path.join(self.out, fname), "w", newline="") as fh:
                    fh.write(text)
                files.append(fname)
        report["failures"] = failures
        if self.config.diagnostics:
            write_report_json(os.path.join(self.out, "report.json"), report)
            files.append("report.json")
        manifest = {
            "hblab_version": __version__,
            "basis_convention": BASIS_CONVENTION,
            "config_sha256": hashlib.sha256(config_text.encode()).hexdigest(),
            "mode": self.mode,
            "files": sorted(files),
            "status": "failed" if failures else "ok",
            "failures": failures,
        }
        with open(os.path.join(self.out, "manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=1, sort_keys=True)
            fh.write("\n")
        return EXIT_NUMERIC if failures else EXIT_OK


# -- entry point -----------------------------------------------------------------------

def _load_measure(arg: str):
    """``--measure`` value: inline JSON or a path to a JSON file."""
    text = arg
    if not arg.lstrip().startswith("{"):
        try:
            with open(arg) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError("/measure", f"cannot read measure file: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("/measure", f"invalid JSON: {exc}") from None


def load_config(path: str, mode: str | None = None, out: str | None = None,
                measure: str | None = None) -> ExperimentConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError("/", f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("/", f"invalid JSON: {exc}") from None
    if isinstance(data, dict):
        if measure:
            data["measure"] = _load_measure(measure)
        if mode:
            data["mode"] = mode
        if out:
            data["output"] = out
    return ExperimentConfig.from_json(data)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="hblab", description="Toeplitz operators on harmonic Bergman spaces")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "describe", "validate"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--measure", help="measure spec overriding the config (inline JSON or file)")
        if name == "run":
            p.add_argument("--mode", choices=("rational", "float"))
            p.add_argument("--out")
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config, getattr(args, "mode", None), getattr(args, "out", None),
                             args.measure)
    except ConfigError as exc:
        print(f"config error at {exc.pointer}: {exc.message}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "validate":
        print("config ok")
        return EXIT_OK
    if args.command == "describe":
        print(format_plan(plan(config)))
        return EXIT_OK
    try:
        runner = Runner(config, config.output)
        status = runner.run()
    except (QuadratureError, IllConditionedBasis, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if status == EXIT_NUMERIC:
        print("one or more diagnostics failed; see manifest.json", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
