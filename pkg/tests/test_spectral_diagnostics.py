from fractions import Fraction

import numpy as np
import pytest

from hblab.bergman_operator import assemble_hankel, assemble_toeplitz, build_block_basis
from hblab.polynomial import Polynomial
from hblab.radial_measure import RadialMeasure, radial_eigenvalue
from hblab.spectral_diagnostics import (
    DecayCertificate,
    block_norm_decay,
    commutator_decay,
    compactness_limit_test,
    essential_norm_estimate,
    extend_boundary_symbol,
    finite_section_spectrum,
    format_degree_csv,
    hausdorff_distance,
    radial_limit_test,
    tail_start,
    write_report_json,
)
from hblab.symbols import SymbolSpec


def test_radial_window_spectrum(jacobi0):
    f = SymbolSpec.radial([1, -1], 2)
    T = assemble_toeplitz(f, jacobi0, 10, "float")
    for m in (0, 3, 10):
        sp = finite_section_spectrum(T, m, m)
        assert len(sp.eigenvalues) == (1 if m == 0 else 2)
        assert np.allclose(sp.eigenvalues, 1 / (m + 2), atol=1e-12)


def test_radial_consistency_n3():
    mu = RadialMeasure.jacobi(1, 3)
    f = SymbolSpec.radial([Fraction(1, 3), 0, 1], 3)
    T = assemble_toeplitz(f, mu, 6, "float")
    for m in range(7):
        ev = finite_section_spectrum(T, m, m).eigenvalues
        assert len(ev) == 2 * m + 1
        assert np.allclose(ev, float(radial_eigenvalue(mu, f.profile, m)), atol=1e-12)


def test_constant_symbol(jacobi0):
    T = assemble_toeplitz(SymbolSpec.constant(2, 3), jacobi0, 8, "float")
    sp = finite_section_spectrum(T, 2, 8, SymbolSpec.constant(2, 3))
    assert np.allclose(sp.eigenvalues, 3) and sp.hausdorff < 1e-12
    assert abs(essential_norm_estimate(T, 4, 8) - 3) < 1e-12


def test_spectral_containment_and_hermitian(jacobi0):
    f = SymbolSpec.polynomial(Polynomial(2, {(1, 0): 1, (1, 1): 2}))
    T = assemble_toeplitz(f, jacobi0, 20, "float")
    sp = finite_section_spectrum(T, 5, 20)
    assert sp.hermitian and not np.iscomplexobj(sp.eigenvalues)
    from hblab.quadrature import ball_samples

    vals = f.evaluate(ball_samples(2, 60, 400))
    assert sp.eigenvalues.min() >= vals.min() - 1e-8 and sp.eigenvalues.max() <= vals.max() + 1e-8
    assert len(sp.eigenvalues) == 1 + 2 * 15 + 1


def test_window_validation(jacobi0):
    T = assemble_toeplitz(SymbolSpec.coordinate(2, 0), jacobi0, 5, "float")
    with pytest.raises(ValueError):
        finite_section_spectrum(T, 3, 6)


def test_essential_norm_radial_decreases(jacobi0):
    T = assemble_toeplitz(SymbolSpec.radial([1, -1], 2), jacobi0, 40, "float")
    vals = [essential_norm_estimate(T, M0, M0 + 10) for M0 in (5, 10, 20, 30)]
    for M0, v in zip((5, 10, 20, 30), vals):
        assert v <= 1 / (M0 + 2) + 1e-12
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_decay_radial_closed_form(jacobi0):
    T = assemble_toeplitz(SymbolSpec.radial([1, -1], 2), jacobi0, 64, "float")
    cert = block_norm_decay(T, 64)
    assert np.allclose(cert.norms, [1 / (m + 2) for m in range(65)], atol=1e-13)
    # 1/(m+2) is still 1/51 at the start of the last quarter
    assert not cert.decaying and block_norm_decay(T, 64, tau=0.03).decaying
    assert all(a >= b for a, b in zip(cert.envelope, cert.envelope[1:]))
    assert cert.rate == pytest.approx(-1, abs=0.05)


def test_tail_start():
    assert tail_start(64) == 49
    assert tail_start(4) == 4


def test_decay_certificate_verdict_from_sequence():
    c = DecayCertificate.from_norms("x", range(9), [1, 1, 1, 1, 1, 1, 1, 0.001, 0.001], 1e-2)
    assert c.decaying
    c = DecayCertificate.from_norms("x", range(9), [0, 0, 0, 0, 0, 0, 0.5, 0.001, 0.02], 1e-2)
    assert not c.decaying


def test_hankel_decays_toeplitz_does_not(jacobi0):
    x1 = SymbolSpec.coordinate(2, 0)
    h = block_norm_decay(assemble_hankel(x1, jacobi0, 32, "float"), 32, tau=0.02)
    t = block_norm_decay(assemble_toeplitz(x1, jacobi0, 32, "float"), 32, tau=0.02)
    assert h.decaying and not t.decaying


def test_commutators(jacobi0):
    x1, x2 = SymbolSpec.coordinate(2, 0), SymbolSpec.coordinate(2, 1)
    c, s = commutator_decay(x1, x2, jacobi0, 40)
    assert c.decaying and s.decaying
    assert len(c.degrees) == 39
    r1, r2 = SymbolSpec.radial([0, 1], 2), SymbolSpec.radial([1, 0, -1], 2)
    c, _ = commutator_decay(r1, r2, jacobi0, 12)
    assert max(c.norms) < 1e-14
    c, _ = commutator_decay(x1, x1, jacobi0, 12)
    assert max(c.norms) < 1e-14
    with pytest.raises(ValueError):
        commutator_decay(x1, x2, jacobi0, 1)


def test_limit_test_examples(jacobi0):
    assert compactness_limit_test(SymbolSpec.radial([1, -1], 2), jacobi0, 10) == [Fraction(1, m + 2) for m in range(11)]
    assert set(compactness_limit_test(SymbolSpec.constant(2, 1), jacobi0, 10)) == {1}
    assert set(compactness_limit_test(SymbolSpec.coordinate(2, 0), jacobi0, 10)) == {0}


def test_limit_test_custom_family(jacobi0):
    # phi_m = sum_j |e_j^(m)|^2 is a multiple of |x|^{2m}
    fam = lambda m: list(build_block_basis(2, m).vectors)
    f = SymbolSpec.radial([1, -1], 2)
    assert compactness_limit_test(f, jacobi0, 6, fam) == compactness_limit_test(f, jacobi0, 6)


def test_limit_test_quadrature(jacobi0):
    f = SymbolSpec.continuous(lambda x: 1 - np.sum(x ** 2, axis=1), 2)
    assert np.allclose(compactness_limit_test(f, jacobi0, 8), [1 / (m + 2) for m in range(9)], atol=1e-12)


def test_necessity_ordering(jacobi0):
    corpus = [SymbolSpec.radial([1, -1], 2), SymbolSpec.radial([1, 0, -1], 2), SymbolSpec.coordinate(2, 0),
              SymbolSpec.constant(2, 1)]
    for f in corpus:
        cert = block_norm_decay(assemble_toeplitz(f, jacobi0, 64, "float"), 64)
        if cert.decaying:
            s = compactness_limit_test(f, jacobi0, 64)
            assert abs(float(s[-1])) < cert.tau


def test_radial_limit_examples():
    t = radial_limit_test(SymbolSpec.coordinate(3, 0), 2)
    assert t[(1, 0, 0)] == Fraction(1, 3)
    assert all(v == 0 for v in radial_limit_test(SymbolSpec.radial([1, -1], 3), 6).values())
    fstar = Polynomial(2, {(2, 0): 1, (0, 0): Fraction(-1, 2)})
    t = radial_limit_test(extend_boundary_symbol(fstar), 2)
    assert t[(0, 0)] == 0 and t[(2, 0)] != 0


def test_radial_limit_quadrature_path():
    phi = extend_boundary_symbol(lambda z: z[:, 0] ** 2 - 0.5, 2)
    t = radial_limit_test(phi, 2)
    assert abs(t[(0, 0)]) < 1e-12 and abs(t[(2, 0)] - 1 / 8) < 1e-12


def test_hausdorff():
    assert hausdorff_distance([0, 1], [0, 1, 0.5]) == 0.5
    assert hausdorff_distance([], [1]) == float("inf")


def test_csv_and_report_format(tmp_path):
    text = format_degree_csv([(0, 0.1, None, Fraction(1, 3)), {"m": 1, "norm": 1 / 3}])
    assert text.splitlines() == ["m,norm,bound,s_m", "0,0.10000000000000001,,0.33333333333333331",
                                 "1,0.33333333333333331,,"]
    write_report_json(tmp_path / "r.json", {"a": [Fraction(1, 2), np.float64(2.0)], "b": complex(1, 2)})
    assert (tmp_path / "r.json").read_text().strip().startswith("{")
