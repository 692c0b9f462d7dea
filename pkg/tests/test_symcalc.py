import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from conftest import SAMPLE_PHI, SAMPLE_PSI, SAMPLE_T1, SAMPLE_T2, monomials, ring_elements, values
from toricfact.errors import NonIntegrable, OrderOverflow
from toricfact.symcalc import (
    COS_PHI, COS_PSI, ONE, SIN_PHI, SIN_PSI, ZERO, MatrixDiffOp, MatrixFun, TrigLaurentFun, compose,
    equal_on_quadrant, formal_adjoint, half_density_form, integrate_quadrant, is_zero, kron, mono,
    pythagorean_normal_form,
)


def close(a, b, tol=1e-9):
    return np.allclose(a, b, rtol=tol, atol=tol)


# -- ring laws, checked against pointwise evaluation -----------------------


@given(ring_elements(laurent=True), ring_elements(laurent=True))
def test_product_matches_pointwise(f, g):
    assert close(values(f * g), values(f) * values(g))


@given(ring_elements(), ring_elements(), ring_elements())
@settings(max_examples=50)
def test_ring_axioms(f, g, h):
    assert ((f * g) * h - f * (g * h)).max_abs() < 1e-10
    assert (f * (g + h) - (f * g + f * h)).max_abs() < 1e-10
    assert (f * g - g * f).max_abs() == 0


@given(ring_elements(laurent=True), ring_elements(laurent=True), st.sampled_from(["theta1", "theta2", "phi", "psi"]))
@settings(max_examples=60)
def test_leibniz(f, g, var):
    assert ((f * g).diff(var) - (f.diff(var) * g + f * g.diff(var))).max_abs() < 1e-10


@given(ring_elements(laurent=True), st.sampled_from(["phi", "psi", "theta1", "theta2"]))
@settings(max_examples=60)
def test_derivative_against_finite_differences(f, var):
    h = 1e-6
    args = {"phi": SAMPLE_PHI, "psi": SAMPLE_PSI, "theta1": SAMPLE_T1, "theta2": SAMPLE_T2}
    plus = dict(args, **{var: args[var] + h})
    minus = dict(args, **{var: args[var] - h})
    fd = (f.evaluate(**plus) - f.evaluate(**minus)) / (2 * h)
    exact = f.diff(var).evaluate(**args)
    assert np.allclose(exact, fd, rtol=1e-5, atol=1e-5 * (1 + np.max(np.abs(exact))))


@given(ring_elements())
def test_conj_is_pointwise_conjugate(f):
    assert close(values(f.conj()), np.conj(values(f)))


def test_reciprocal_only_for_monomials():
    m = mono(a=2, d=1, coeff=3.0)
    assert ((m * m.reciprocal()) - ONE).is_zero()
    with pytest.raises(ValueError):
        (COS_PHI + SIN_PHI).reciprocal()


# -- quadrature oracle for the Beta-function integrals ---------------------


@pytest.mark.parametrize("a,b,c,d", [(0, 0, 0, 0), (1, 1, 2, 0), (3, 1, 1, 2), (2, 0, 3, 4), (0, 5, 0, 1)])
def test_integrate_quadrant_against_scipy(a, b, c, d):
    f = mono(a=a, b=b, c=c, d=d)
    ref, _ = integrate.dblquad(lambda s, p: np.cos(p) ** a * np.sin(p) ** b * np.cos(s) ** c * np.sin(s) ** d,
                               0, np.pi / 2, -np.pi / 2, np.pi / 2, epsabs=1e-12, epsrel=1e-12)
    assert integrate_quadrant(f) == pytest.approx((2 * np.pi) ** 2 * ref, rel=1e-9, abs=1e-12)


def test_integrate_fractional_singularity_is_fine_and_nonintegrable_raises():
    assert abs(integrate_quadrant(mono(n1=1, a=-3))) == 0   # oscillating modes integrate to zero
    with pytest.raises(NonIntegrable):
        integrate_quadrant(mono(a=-1))


# -- Pythagorean normal form ----------------------------------------------


def test_sphere_identity_needs_pythagorean_reduction():
    f = COS_PHI ** 2 * COS_PSI ** 2 + SIN_PHI ** 2 * COS_PSI ** 2 + SIN_PSI ** 2 - ONE
    assert not f.is_zero()
    assert pythagorean_normal_form(f)[0].is_zero()


@given(ring_elements(laurent=True, modes=False), ring_elements(laurent=True, modes=False))
@settings(max_examples=60)
def test_normal_form_decides_pointwise_equality(f, g):
    pyth = COS_PHI ** 2 + SIN_PHI ** 2
    assert equal_on_quadrant(f * pyth, f)
    same = np.allclose(values(f), values(g), rtol=1e-9, atol=1e-9)
    assert equal_on_quadrant(f, g) == same


# -- matrix functions and operators ----------------------------------------


S1 = np.array([[0, 1], [1, 0]], complex)
S3 = np.diag([1.0, -1.0]).astype(complex)


@given(ring_elements(laurent=True, max_terms=2), ring_elements(laurent=True, max_terms=2))
@settings(max_examples=30)
def test_matrixfun_product_pointwise(f, g):
    A = MatrixFun.from_scalar(f, S1) + MatrixFun.from_scalar(g, S3)
    B = MatrixFun.from_scalar(g, S1 @ S3)
    lhs = (A @ B).evaluate(SAMPLE_PHI, SAMPLE_PSI, SAMPLE_T1, SAMPLE_T2)
    rhs = A.evaluate(SAMPLE_PHI, SAMPLE_PSI, SAMPLE_T1, SAMPLE_T2) @ B.evaluate(SAMPLE_PHI, SAMPLE_PSI, SAMPLE_T1, SAMPLE_T2)
    assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-9)


def test_kron_evaluates_to_numpy_kron():
    A = MatrixFun.from_scalar(COS_PHI, S1)
    B = MatrixFun.from_scalar(SIN_PSI, S3)
    k = kron(A, B).evaluate(0.3, 0.2)
    assert np.allclose(k, np.kron(A.evaluate(0.3, 0.2), B.evaluate(0.3, 0.2)))


def _random_first_order(rng, size=2):
    terms = {}
    for key in [(1, 0, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1), (0, 0, 0, 0)]:
        f = mono(0, 0, *rng.integers(-1, 3, 4), coeff=complex(rng.normal(), rng.normal()))
        terms[key] = (f, rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size)))
    return MatrixDiffOp(size, terms)


@given(st.integers(0, 10_000), monomials(), monomials())
@settings(max_examples=30, deadline=None)
def test_composition_equals_successive_application(seed, s1, s2):
    rng = np.random.default_rng(seed)
    P, Q = _random_first_order(rng), _random_first_order(rng)
    section = [s1, s2]
    direct = P.apply(Q.apply(section))
    composed = (P @ Q).apply(section)
    for a, b in zip(direct, composed):
        assert (a - b).max_abs() <= 1e-9 * max(1.0, a.max_abs())


def test_order_cap():
    d = MatrixDiffOp.partial("phi", 1)
    with pytest.raises(OrderOverflow):
        compose(d @ d, d)


def _pairing(u, v, w, phi, psi, weights):
    """∫ <u, v> w dφ dψ over a tensor quadrature (u, v arrays (..., size))."""
    return np.sum(np.sum(np.conj(u) * v, axis=-1) * w * weights)


def test_formal_adjoint_against_quadrature():
    """<P ξ, η>_w = <ξ, P* η>_w for compactly supported ξ, η, by Gauss-Legendre quadrature."""
    rng = np.random.default_rng(3)
    P = _random_first_order(rng)
    P = MatrixDiffOp(2, {k: m for k, m in P.terms.items() if k[0] == 0})   # theta-independent sections
    w = mono(a=1, b=1, c=3)
    Pstar = formal_adjoint(P, w)
    bump = mono(a=3, b=3, c=4)          # vanishes to high order on the quadrant edges
    xi = [bump * mono(d=1), bump * mono(a=1, coeff=2j)]
    eta = [bump * mono(b=2), bump * mono(c=1, d=1, coeff=-1)]
    xg, wg = np.polynomial.legendre.leggauss(80)
    phi = (xg + 1) * np.pi / 4
    psi = xg * np.pi / 2
    Pg, Sg = np.meshgrid(phi, psi, indexing="ij")
    weights = np.outer(wg * np.pi / 4, wg * np.pi / 2)
    ev = lambda sec: np.stack([s.evaluate(Pg, Sg) for s in sec], axis=-1)
    wv = w.evaluate(Pg, Sg).real
    lhs = _pairing(ev(P.apply(xi)), ev(eta), wv, Pg, Sg, weights)
    rhs = _pairing(ev(xi), ev(Pstar.apply(eta)), wv, Pg, Sg, weights)
    assert abs(lhs - rhs) < 1e-9 * max(1.0, abs(lhs))


def test_half_density_form_conjugates_by_root_weight():
    """w^{1/2} P w^{-1/2} applied to f agrees with the definition evaluated pointwise."""
    P = MatrixDiffOp(1, {(0, 0, 1, 0): (COS_PSI.reciprocal(), np.eye(1)), (0, 0, 0, 1): (ONE, np.eye(1))})
    w = mono(a=1, b=1, c=3)
    f = mono(a=2, b=1, c=2, d=1)
    H = half_density_form(P, w)
    h = 1e-6
    phi, psi = 0.7, 0.3
    g = lambda p, s: f.evaluate(p, s) / np.sqrt(w.evaluate(p, s).real)
    dphi = (g(phi + h, psi) - g(phi - h, psi)) / (2 * h)
    dpsi = (g(phi, psi + h) - g(phi, psi - h)) / (2 * h)
    ref = np.sqrt(w.evaluate(phi, psi).real) * (dphi / np.cos(psi) + dpsi)
    assert H.apply([f])[0].evaluate(phi, psi) == pytest.approx(ref, rel=1e-6)


def test_is_zero_reports_residual():
    ok, r = is_zero(MatrixDiffOp.partial("psi", 2) * 0.25)
    assert not ok and r == pytest.approx(0.25)
    assert is_zero(MatrixDiffOp(3))[0]
    assert is_zero(ZERO)[0]
