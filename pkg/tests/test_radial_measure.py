from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from hblab.radial_measure import (
    QuadratureError,
    RadialMeasure,
    RadialProfile,
    gamma_sequence,
    moment_ratio_limit_diagnostic,
    radial_eigenvalue,
)


def test_jacobi0_moments():
    mu = RadialMeasure.jacobi(0, 2)
    assert [mu.moment(k) for k in range(5)] == [Fraction(1, k + 1) for k in range(5)]


@pytest.mark.parametrize("alpha,n", [(0, 3), (1, 2), (2, 4), ("1/2", 3), (-0.5, 2)])
def test_jacobi_moments_match_direct_integral(alpha, n):
    mu = RadialMeasure.jacobi(alpha, n)
    a = float(Fraction(str(alpha)))
    dens = lambda r, k: (1 - r * r) ** a * r ** (n - 1 + 2 * k)
    z = integrate.quad(lambda r: dens(r, 0), 0, 1)[0]
    for k in range(6):
        val = integrate.quad(lambda r: dens(r, k), 0, 1)[0] / z
        assert abs(float(mu.moment(k)) - val) < 1e-10


def test_single_atom_moments():
    mu = RadialMeasure.atomic([("999/1000", 1)], 2)
    assert mu.moment(3) == Fraction(999, 1000) ** 6


def test_support_condition_enforced():
    with pytest.raises(ValueError):
        RadialMeasure.atomic([("1/2", 1)], 2)
    mu = RadialMeasure.atomic([("1/2", 1)], 2, truncated=True)
    with pytest.raises(ValueError):
        moment_ratio_limit_diagnostic(mu, RadialProfile.polynomial([0, 1]), 1, 10)


def test_invalid_atoms():
    with pytest.raises(ValueError):
        RadialMeasure.atomic([(1, 1)], 2)
    with pytest.raises(ValueError):
        RadialMeasure.atomic([("0.9995", 0)], 2)
    with pytest.raises(ValueError):
        RadialMeasure.jacobi(-1, 2)


def test_geometric_measure():
    mu = RadialMeasure.geometric(2)
    assert len(mu.atoms) == 20 and mu.moment(0) == 1
    assert mu.atoms[-1][0] == 1 - Fraction(1, 2 ** 20)


@pytest.mark.parametrize("mu", [RadialMeasure.jacobi(0, 2), RadialMeasure.jacobi(1, 3), RadialMeasure.geometric(2)])
def test_moments_positive_decreasing(mu):
    vals = mu.moment_table(30)
    assert vals[0] == 1
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_radial_eigenvalues():
    mu = RadialMeasure.jacobi(0, 2)
    r2 = RadialProfile.polynomial([0, 1])
    one_minus = RadialProfile.polynomial([1, -1])
    for m in range(10):
        assert radial_eigenvalue(mu, r2, m) == Fraction(m + 1, m + 2)
        assert radial_eigenvalue(mu, one_minus, m) == Fraction(1, m + 2)
        assert radial_eigenvalue(mu, RadialProfile.polynomial([1]), m) == 1


def test_radial_eigenvalue_quadrature_path():
    mu = RadialMeasure.jacobi(0, 2)
    phi = RadialProfile.callable(lambda r: r ** 2)
    assert abs(radial_eigenvalue(mu, phi, 3) - 4 / 5) < 1e-12


def test_gamma_sequence():
    g = gamma_sequence(RadialMeasure.jacobi(0, 2), 5)
    assert g.values[:3] == [Fraction(1, 2), Fraction(2, 3), Fraction(3, 4)]
    assert g.strictly_increasing and not g.equality_case
    single = gamma_sequence(RadialMeasure.atomic([("0.9999", 1)], 2), 5)
    assert single.equality_case and not single.strictly_increasing
    assert len(set(single.values)) == 1


@pytest.mark.parametrize("alpha", [0, 1, 2])
def test_ratio_limit_diagnostic(alpha):
    mu = RadialMeasure.jacobi(alpha, 2)
    rep = moment_ratio_limit_diagnostic(mu, RadialProfile.polynomial([0, 1]), 1, 200)
    assert rep.converged
    assert all(b <= a for a, b in zip(rep.tail_max, rep.tail_max[1:]))


def test_constant_profile_zero_gap():
    rep = moment_ratio_limit_diagnostic(RadialMeasure.jacobi(0, 2), RadialProfile.polynomial([3]), 3, 20)
    assert max(rep.gaps) == 0


@pytest.mark.parametrize("alpha,n", [(0, 2), (1, 2), (2, 3)])
def test_truncated_moment_exact_vs_float(alpha, n):
    mu = RadialMeasure.jacobi(alpha, n)
    for k in range(5):
        exact = mu.truncated_moment(k, Fraction(9, 10))
        approx = mu.as_float().truncated_moment(k, 0.9)
        assert abs(float(exact) - approx) < 1e-13


def test_float_mode_conversion():
    mu = RadialMeasure.jacobi(1, 2)
    assert mu.as_float().mode == "float"
    with pytest.raises(ValueError):
        mu.as_float().with_mode("rational")


def test_json_round_trip():
    for mu in (RadialMeasure.jacobi("1/2", 3), RadialMeasure.geometric(2)):
        back = RadialMeasure.from_json(mu.to_json())
        assert [back.moment(k) for k in range(6)] == [mu.moment(k) for k in range(6)]


def test_integrate_reports_failure():
    mu = RadialMeasure.jacobi(0, 2).as_float()
    with pytest.raises(QuadratureError):
        mu.integrate(lambda r: np.sign(np.sin(1 / (1 - r))), rtol=1e-14, max_nodes=256)
