import numpy as np
import pytest

from toricfact.errors import UnsupportedSpec
from toricfact.geometry import (
    W_B, W_S4, W_X, CurvatureForm, FibrationSpec, SphereGeometry, curvature_form, exact_fibration,
    levi_civita, mean_curvature_from_sff, second_fundamental_form_from_metric, sphere_fibration,
    sphere_generators, sphere_mean_curvature, sphere_relation_residual, sphere_second_fundamental_form,
    structure_constants, twisted_fibration,
)
from toricfact.symcalc import COS_PSI, ONE, SIN_PSI, ZERO, mono, pythagorean_normal_form


def embedding(t1, t2, phi, psi):
    return np.array([np.cos(phi) * np.cos(psi) * np.cos(t1), np.cos(phi) * np.cos(psi) * np.sin(t1),
                     np.sin(phi) * np.cos(psi) * np.cos(t2), np.sin(phi) * np.cos(psi) * np.sin(t2),
                     np.sin(psi)])


def numeric_metric(t1, t2, phi, psi, h=1e-6):
    x = np.array([t1, t2, phi, psi], float)
    J = []
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        J.append((embedding(*(x + e)) - embedding(*(x - e))) / (2 * h))
    J = np.array(J)
    return J @ J.T


def test_metric_matches_embedding():
    g = SphereGeometry()
    for phi, psi in [(0.3, 0.2), (1.1, -0.7), (0.8, 1.2)]:
        G = numeric_metric(0.4, 1.3, phi, psi)
        diag = [m.evaluate(phi, psi).real for m in g.metric]
        assert np.allclose(G, np.diag(diag), atol=1e-8)


def test_volume_density_and_weights():
    g = SphereGeometry()
    assert (g.volume_density() - W_S4).is_zero()
    assert (W_X * W_B - W_S4).is_zero()


def test_generators_satisfy_sphere_relation():
    assert sphere_relation_residual() < 1e-15
    gens = sphere_generators()
    phi, psi, t1, t2 = 0.4, -0.3, 1.0, 2.0
    p = embedding(t1, t2, phi, psi)
    assert gens["a"].fun.evaluate(phi, psi, t1, t2) == pytest.approx(p[0] + 1j * p[1])
    assert gens["b"].fun.evaluate(phi, psi, t1, t2) == pytest.approx(p[2] + 1j * p[3])
    assert gens["x"].fun.evaluate(phi, psi) == pytest.approx(p[4])


def test_second_fundamental_form_two_routes():
    printed = sphere_second_fundamental_form()
    derived = second_fundamental_form_from_metric(SphereGeometry())
    for a in range(2):
        for z in range(2):
            assert pythagorean_normal_form(printed(a, z) - derived(a, z))[0].is_zero()


def test_mean_curvature_two_routes():
    k = sphere_mean_curvature()
    k2 = mean_curvature_from_sff(sphere_second_fundamental_form(), SphereGeometry())
    assert (k.k_phi - k2.k_phi).max_abs() == 0
    assert (k.k_psi - k2.k_psi).max_abs() == 0
    # k is d log of the orbit area r1 r2 = sinφ cosφ cos²ψ
    area = mono(a=1, b=1, c=2)
    assert (k.k_phi - area.log_derivative("phi")).max_abs() < 1e-15
    assert (k.k_psi - area.log_derivative("psi")).max_abs() < 1e-15


def _frame_orthonormality(spec):
    """g(E_I, E_J) from the coframe pairing, which must be δ_IJ."""
    from toricfact.geometry import pair
    E, Th = spec.frame(), spec.coframe()
    return max(pythagorean_normal_form(pair(Th[i], E[j]) - (ONE if i == j else ZERO))[0].max_abs()
               for i in range(4) for j in range(4))


@pytest.mark.parametrize("spec", [sphere_fibration(), twisted_fibration(), exact_fibration()])
def test_frame_and_levi_civita(spec):
    assert _frame_orthonormality(spec) == 0
    G = levi_civita(spec)
    for i in range(4):
        for j in range(4):
            for k in range(4):
                # metric compatibility in an orthonormal frame: antisymmetry in the last two slots
                assert pythagorean_normal_form(G[i, j, k] + G[i, k, j])[0].is_zero()
    c = structure_constants(spec)
    for i in range(4):
        for j in range(4):
            for k in range(4):
                # torsion free: G[I,J,K] - G[J,I,K] = c[I,J,K]
                assert pythagorean_normal_form(G[i, j, k] - G[j, i, k] - c[i, j, k])[0].is_zero()


def test_curvature_forms():
    assert curvature_form(sphere_fibration()).is_zero()
    assert curvature_form(exact_fibration()).is_zero()
    assert exact_fibration().is_closed()
    tw = curvature_form(twisted_fibration())
    assert not tw.is_zero()
    # [d_u - sinψ d_θ1, d_v] = cosψ d_θ1; with unit fiber length Ω(d_u, d_v, d_θ1) = cosψ
    assert (tw.coordinate[0] - COS_PSI).max_abs() == 0
    assert tw((1, 0), (0, 1), (1, 0)).evaluate(0.3, 0.5) == pytest.approx(np.cos(0.5))
    assert tw((0, 1), (1, 0), (1, 0)).evaluate(0.3, 0.5) == pytest.approx(-np.cos(0.5))


def test_unsupported_specs():
    with pytest.raises(UnsupportedSpec):
        FibrationSpec((ONE, ONE, ONE), (ONE, ONE))
    with pytest.raises(UnsupportedSpec):
        FibrationSpec((ONE, ONE), (ONE,))
    with pytest.raises(UnsupportedSpec):
        FibrationSpec((ONE + SIN_PSI, ONE), (ONE, ONE))
    with pytest.raises(UnsupportedSpec):
        FibrationSpec((ONE, ONE), (ONE, ONE), connection=((mono(n1=1), ZERO), (ZERO, ZERO)))
