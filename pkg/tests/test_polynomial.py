from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hblab.polynomial import Polynomial, fischer_product, monomials, multi_factorial


def poly_strategy(n=2, max_deg=3):
    alphas = st.lists(st.integers(0, max_deg), min_size=n, max_size=n).map(tuple)
    coefs = st.fractions(min_value=-5, max_value=5, max_denominator=7)
    return st.dictionaries(alphas, coefs, max_size=6).map(lambda d: Polynomial(n, d))


def test_monomials_lex_order_and_count():
    ms = monomials(3, 2)
    assert ms == sorted(ms)
    assert len(ms) == 6
    assert all(sum(a) == 2 for a in ms)


def test_multi_factorial():
    assert multi_factorial((3, 0, 2)) == 12


def test_zero_terms_dropped_and_degree():
    p = Polynomial(2, {(1, 0): 0, (0, 2): Fraction(1, 2)})
    assert len(p) == 1
    assert p.degree == 2 and p.homogeneous_degree == 2


def test_laplacian_of_norm_squared():
    r2 = Polynomial.norm_squared(3)
    assert r2.laplacian() == Polynomial.constant(3, 6)


def test_string_coefficients_are_exact():
    p = Polynomial(2, {(1, 1): "1/3"})
    assert p.coefficient((1, 1)) == Fraction(1, 3)


def test_bad_exponent_rejected():
    with pytest.raises(ValueError):
        Polynomial(2, {(1,): 1})


def test_json_round_trip():
    p = Polynomial(3, {(1, 0, 2): Fraction(-3, 7), (0, 0, 0): 2})
    assert Polynomial.from_json(p.to_json()) == p


def test_evaluate_matches_manual():
    p = Polynomial(2, {(2, 0): 1, (0, 1): -3})
    pts = np.array([[0.5, 2.0], [-1.0, 0.0]])
    assert np.allclose(p.evaluate(pts), pts[:, 0] ** 2 - 3 * pts[:, 1])


@given(poly_strategy(), poly_strategy(), poly_strategy())
def test_ring_axioms(p, q, r):
    assert (p + q) * r == p * r + q * r
    assert p * q == q * p
    assert (p - p).is_zero()


@given(poly_strategy(), poly_strategy())
def test_laplacian_is_linear(p, q):
    assert (p + q * 3).laplacian() == p.laplacian() + q.laplacian() * 3


@given(poly_strategy(), poly_strategy())
def test_fischer_product_symmetric(p, q):
    assert fischer_product(p, q) == fischer_product(q, p)
    assert fischer_product(p, p) >= 0


@given(poly_strategy(max_deg=2), poly_strategy(max_deg=2))
def test_fischer_adjointness_of_laplacian(p, q):
    # [Delta p, q] = [p, |x|^2 q]
    r2 = Polynomial.norm_squared(2)
    assert fischer_product(p.laplacian(), q) == fischer_product(p, r2 * q)
