from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from hblab.bergman_operator import (
    BlockOperator,
    KernelDiagonal,
    W_and_boundary_matrix,
    a1_a2_block_norms,
    assemble_boundary,
    assemble_hankel,
    assemble_toeplitz,
    bergman_inner_product,
    hankel_gram,
    harmonic_pairing,
    hs_norm_truncated_multiplication,
    kernel_diagonal,
    multiplication_norm_identity,
    project_Q,
    reduction_cross_gram,
    toeplitz_block,
    verify_toeplitz_hankel_identity,
    w_block,
    w_norm_squared,
)
from hblab.harmonic_basis import build_block_basis, dim_harmonic
from hblab.polynomial import Polynomial, monomials
from hblab.radial_measure import RadialMeasure
from hblab.surd import Surd
from hblab.symbols import SymbolSpec

X1 = Polynomial(2, {(1, 0): 1})
X2 = Polynomial(2, {(0, 1): 1})


def test_inner_product_examples(jacobi0):
    one = Polynomial.constant(2, 1)
    assert bergman_inner_product(one, one, jacobi0) == 1
    assert bergman_inner_product(X1, X1, jacobi0) == Fraction(1, 4)
    assert bergman_inner_product(X1, X2, jacobi0) == 0


def test_inner_product_matches_direct_integration():
    mu = RadialMeasure.jacobi(1, 2)
    p = Polynomial(2, {(2, 1): 1, (0, 0): 2})
    q = Polynomial(2, {(1, 1): 3, (0, 3): 1})
    x, y = sympy.symbols("x y", real=True)
    r, t = sympy.symbols("r t", positive=True)
    P = 2 + x ** 2 * y
    Q = 3 * x * y + y ** 3
    integrand = (P * Q).subs({x: r * sympy.cos(t), y: r * sympy.sin(t)})
    # dnu = c (1 - r^2) r dr dt/(2 pi) with c = 4
    val = sympy.integrate(sympy.integrate(integrand * 4 * (1 - r ** 2) * r, (r, 0, 1)), (t, 0, 2 * sympy.pi)) / (2 * sympy.pi)
    assert bergman_inner_product(p, q, mu) == Fraction(str(sympy.nsimplify(val)))


def test_dimension_mismatch(jacobi0):
    with pytest.raises(ValueError):
        bergman_inner_product(Polynomial.constant(3, 1), Polynomial.constant(3, 1), jacobi0)


@pytest.mark.parametrize("n,m,k", [(2, 3, 1), (3, 2, 4), (3, 1, 1)])
def test_harmonic_pairing_matches_inner_product(n, m, k):
    mu = RadialMeasure.jacobi(1, n)
    g = Polynomial.monomial(monomials(n, k + 2)[1], Fraction(1)) * Polynomial.norm_squared(n)
    for h in build_block_basis(n, m).vectors:
        assert harmonic_pairing(g, h, m, mu) == bergman_inner_product(g, h, mu)


def test_project_Q_examples(jacobi0):
    assert project_Q(X1 * X2, jacobi0) == X1 * X2
    assert project_Q(Polynomial.norm_squared(2), jacobi0) == Polynomial.constant(2, Fraction(1, 2))
    expected = Polynomial(2, {(2, 0): Fraction(1, 2), (0, 2): Fraction(-1, 2), (0, 0): Fraction(1, 4)})
    assert project_Q(X1 * X1, jacobi0) == expected


def test_project_Q_against_gram_solve(jacobi0):
    # orthogonal projection onto harmonic polynomials of degree <= 2 via a Gram solve
    P = X1 * X1
    basis = [v for m in range(3) for v in build_block_basis(2, m).vectors]
    G = sympy.Matrix([[sympy.Rational(str(bergman_inner_product(a, b, jacobi0))) for b in basis] for a in basis])
    rhs = sympy.Matrix([sympy.Rational(str(bergman_inner_product(P, a, jacobi0))) for a in basis])
    c = G.LUsolve(rhs)
    proj = Polynomial(2)
    for ci, v in zip(c, basis):
        proj = proj + v * Fraction(str(ci))
    assert proj == project_Q(P, jacobi0)


@given(st.integers(0, 4), st.data())
def test_project_Q_idempotent_and_self_adjoint(k, data):
    mu = RadialMeasure.jacobi(1, 3)
    a = data.draw(st.sampled_from(monomials(3, k)))
    b = data.draw(st.sampled_from(monomials(3, data.draw(st.integers(0, 4)))))
    P1, P2 = Polynomial.monomial(a, Fraction(1)), Polynomial.monomial(b, Fraction(1))
    Q1 = project_Q(P1, mu)
    assert Q1.laplacian().is_zero()
    assert project_Q(Q1, mu) == Q1
    assert bergman_inner_product(Q1, P2, mu) == bergman_inner_product(P1, project_Q(P2, mu), mu)


def test_toeplitz_golden_entry(jacobi0):
    # e_0 = 1, basis of H_1 = (x2, x1)/sqrt(1/2); column of T_{x1} e_0 in e^(1) coordinates
    blk = toeplitz_block(SymbolSpec.coordinate(2, 0), 1, 0, jacobi0)
    assert blk.shape == (2, 1)
    assert blk[0, 0] == 0 and blk[1, 0] == Surd(Fraction(1, 2))


def test_toeplitz_against_dense_oracle():
    # entries <f e_j, e_i> computed from monomial moments and explicit normalisation
    mu = RadialMeasure.jacobi(1, 3)
    f = SymbolSpec.polynomial(Polynomial(3, {(1, 1, 0): 2, (0, 0, 1): -1}))
    T = assemble_toeplitz(f, mu, 3, "rational")
    for (m, k), blk in T.blocks.items():
        if k > 3:
            continue
        bm, bk = build_block_basis(3, m), build_block_basis(3, k)
        for i, pi in enumerate(bm.vectors):
            for j, pj in enumerate(bk.vectors):
                ip = bergman_inner_product(f.poly * pj, pi, mu)
                ref = float(ip) / np.sqrt(float(bm.sq_norms[i] * bk.sq_norms[j] * mu.moment(m) * mu.moment(k)))
                assert abs(float(blk[i, j]) - ref) < 1e-14


@pytest.mark.parametrize("coeffs", [[1], [0, 1], [1, -1], [0, 0, 1]])
def test_radial_symbol_blocks_scalar(coeffs):
    mu = RadialMeasure.jacobi(1, 3)
    T = assemble_toeplitz(SymbolSpec.radial(coeffs, 3), mu, 5, "rational")
    for (m, k), blk in T.blocks.items():
        assert m == k
        lam = blk[0, 0]
        for i in range(blk.shape[0]):
            for j in range(blk.shape[1]):
                assert blk[i, j] == (lam if i == j else 0)


def test_bandwidth_and_shapes(jacobi0):
    f = SymbolSpec.polynomial(X1 * X1 * X2)
    T = assemble_toeplitz(f, jacobi0, 8, "float")
    assert T.bandwidth == 3 and T.row_max == 11
    for (m, k), blk in T.blocks.items():
        assert abs(m - k) <= 3 and (m + k + 3) % 2 == 0
        assert blk.shape == (dim_harmonic(2, m), dim_harmonic(2, k))


def test_adjoint_and_linearity():
    mu = RadialMeasure.jacobi(0, 3)
    f = SymbolSpec.polynomial(Polynomial(3, {(1, 0, 0): 1, (0, 1, 1): Fraction(1, 2)}))
    g = SymbolSpec.polynomial(Polynomial(3, {(0, 0, 2): 3}))
    Tf = assemble_toeplitz(f, mu, 4, "rational")
    Tg = assemble_toeplitz(g, mu, 4, "rational")
    Th = assemble_toeplitz(f * 2 + g * -1, mu, 4, "rational")
    for m in range(5):
        for k in range(5):
            a, b = Tf.exact_block(m, k), Tf.exact_block(k, m)
            assert all(x == y for x, y in zip(a.flat, b.T.flat))
            lin = [2 * x - y for x, y in zip(a.flat, Tg.exact_block(m, k).flat)]
            assert all(x == y for x, y in zip(lin, Th.exact_block(m, k).flat))


def test_float_and_rational_agree(jacobi0):
    f = SymbolSpec.polynomial(X1 * X2 + X1)
    A = assemble_toeplitz(f, jacobi0, 10, "rational").dense()
    B = assemble_toeplitz(f, jacobi0, 10, "float").dense()
    assert np.max(np.abs(A - B)) < 1e-14
    assert np.allclose(A, A.T, atol=1e-12)


def test_quadrature_path_matches_exact():
    mu = RadialMeasure.jacobi(1, 3)
    poly = Polynomial(3, {(1, 0, 1): 1, (0, 2, 0): -1})
    exact = assemble_toeplitz(SymbolSpec.polynomial(poly), mu, 4, "float").dense()
    cont = SymbolSpec.continuous(poly.to_float().evaluate, 3)
    quad = assemble_toeplitz(cont, mu, 4, "float").dense()
    assert np.max(np.abs(exact - quad)) < 1e-10


def test_bundle_round_trip(tmp_path, jacobi0):
    T = assemble_toeplitz(SymbolSpec.coordinate(2, 0), jacobi0, 6, "rational")
    path = tmp_path / "t.zip"
    T.save_bundle(path)
    back = BlockOperator.load_bundle(path)
    assert back.header()["basis_convention"] == "lex-gs-1"
    assert np.array_equal(back.dense(0, 6, rows=(0, 7)), T.dense(0, 6, rows=(0, 7)))


def test_hankel_gram_examples(jacobi0):
    one = Polynomial.constant(2, 1)
    c = SymbolSpec.constant(2, 3)
    assert hankel_gram(c, c, X1, X1, jacobi0) == 0
    x1 = SymbolSpec.coordinate(2, 0)
    assert hankel_gram(x1, x1, one, one, jacobi0) == 0
    f = SymbolSpec.radial([0, 1], 2)
    lam0 = Fraction(1, 2)
    ff = bergman_inner_product(f.poly, f.poly, jacobi0)
    assert hankel_gram(f, f, one, one, jacobi0) == ff - lam0 ** 2


def test_hankel_x1_closed_form(jacobi0):
    H = assemble_hankel(SymbolSpec.coordinate(2, 0), jacobi0, 12, "rational")
    for m in range(2, 13):
        G = H.grams[m]
        assert G[0, 0] == Surd(Fraction(1, 4 * (m + 1) * (m + 2))) and G[0, 1] == 0


@pytest.mark.parametrize("n", [2, 3])
def test_toeplitz_hankel_identity_examples(n):
    mu = RadialMeasure.jacobi(0, n)
    r2 = SymbolSpec.polynomial(Polynomial.norm_squared(n))
    xy = SymbolSpec.polynomial(Polynomial.monomial((1, 1) + (0,) * (n - 2), 1))
    c = SymbolSpec.constant(n, 2)
    for p in build_block_basis(n, 3).vectors[:2]:
        for q in build_block_basis(n, 2).vectors[:2]:
            assert verify_toeplitz_hankel_identity(r2, xy, p, q, mu) == 0
            assert verify_toeplitz_hankel_identity(c, xy, p, q, mu) == 0


def test_boundary_identity_and_coupling():
    n = 2
    one = Polynomial.constant(n, 1)
    for m in range(4):
        for k in range(4):
            blk = W_and_boundary_matrix(one, m, k, n)
            exp = np.eye(dim_harmonic(n, m)) if m == k else 0
            assert np.array_equal(blk.astype(float), np.zeros(blk.shape) + exp)
    B = assemble_boundary(X1, n, 6, "rational")
    assert all(abs(m - k) == 1 for m, k in B.blocks)


def test_boundary_quadrature_path():
    poly = Polynomial(3, {(2, 0, 0): 1, (0, 1, 1): 1})
    exact = W_and_boundary_matrix(poly, 2, 2, 3, "float")
    quad = W_and_boundary_matrix(poly.to_float().evaluate, 2, 2, 3, "float")
    assert np.max(np.abs(exact - quad)) < 1e-12


def test_w_isometry():
    mu = RadialMeasure.jacobi(1, 3)
    for m in range(5):
        W = w_block(m, mu)
        WtW = W.T.dot(W)
        assert all(x == (1 if i == j else 0) for (i, j), x in np.ndenumerate(WtW))
    rng = np.random.default_rng(1)
    for _ in range(5):
        u = Polynomial(3)
        for m in range(9):
            for v in build_block_basis(3, m).vectors:
                u = u + v * Fraction(int(rng.integers(-3, 4)))
        assert w_norm_squared(u, mu) == bergman_inner_product(u, u, mu)


def test_a1_a2_reduction(jacobi0):
    rows = a1_a2_block_norms(jacobi0, 20)
    assert rows[0].a2 == 0
    for r in rows:
        assert r.a1 <= r.a1_bound + 1e-12 and r.a2 <= r.a2_bound + 1e-12
        assert abs(r.direct - r.split) < 1e-10
        assert r.direct <= r.a1 + r.a2 + 1e-12
        assert abs(r.a1_bound - (np.sqrt((r.m + 2) / (r.m + 1)) - 1)) < 1e-14
    assert reduction_cross_gram(jacobi0, 6) == 0


@pytest.mark.parametrize("n", [2, 3])
def test_multiplication_norm_identity(n):
    mu = RadialMeasure.jacobi(1, n)
    for m in range(5):
        for p in build_block_basis(n, m).vectors:
            lhs, rhs = multiplication_norm_identity(p, mu)
            assert lhs == rhs
    lhs, rhs = multiplication_norm_identity(Polynomial.constant(n, 1), mu)
    assert lhs == mu.moment(1) / n


def test_kernel_diagonal(jacobi0):
    assert kernel_diagonal(jacobi0, 0.0, 5) == 1
    t = 0.25
    assert abs(kernel_diagonal(jacobi0, 0.5, 200) - (2 / (1 - t) ** 2 - 1)) < 1e-12
    kd = KernelDiagonal.build(jacobi0, 10)
    assert all(c > 0 for c in kd.coefficients)
    sums = [kernel_diagonal(jacobi0, (0.3, 0.4), M) for M in range(10)]
    assert all(b >= a for a, b in zip(sums, sums[1:]))
    with pytest.raises(ValueError):
        kernel_diagonal(jacobi0, (0.8, 0.6), 3)


def test_hs_norm_paths(jacobi0):
    zero = SymbolSpec.constant(2, 0)
    assert hs_norm_truncated_multiplication(zero, Fraction(1, 2), jacobi0, 5, "basis") == 0
    one = SymbolSpec.constant(2, 1)
    r = Fraction(3, 5)
    expected = sum(2 * jacobi0.truncated_moment(m, r) / jacobi0.moment(m) if m else jacobi0.truncated_moment(0, r)
                   for m in range(9))
    assert abs(hs_norm_truncated_multiplication(one, r, jacobi0, 8, "basis") - float(expected)) < 1e-14
    assert abs(hs_norm_truncated_multiplication(one, 0.6, jacobi0, 8, "integral") - float(expected)) < 1e-10
    with pytest.raises(ValueError):
        hs_norm_truncated_multiplication(one, 1.0, jacobi0, 8)
