import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toricfact.errors import EmptySupport
from toricfact.geometry import exact_fibration, sphere_fibration, twisted_fibration
from toricfact.kk_verify import (
    LocalizingElement, connection_residual, garding_ratios, kappa_bound, kappa_sup, localized_form_minimum,
    sum_of_squares_residual, verify_anticommutator, verify_connection_condition, verify_curvature_obstruction,
    verify_factorization, verify_sphere_relations, verify_torus,
)
from toricfact.kk_verify.localization import _localized_operators
from toricfact.kk_verify.suites import eigen_equation_residual, orthonormality_residual
from toricfact.operators.numeric import GridSpec, ModeSet
from toricfact.operators.symbolic import kappa_expression
from toricfact.report import VerificationReport, merge
from toricfact.symcalc import mono


# -- reports -----------------------------------------------------------------

def test_report_serialization_is_deterministic():
    r = VerificationReport("demo", {"seed": 1})
    r.add("a", 1e-16, 1e-13)
    r.add("b", 2.0, 1e-3)
    r.info["const"] = 0.25j
    d = json.loads(r.to_json(timestamp=False))
    assert [c["status"] for c in d["checks"]] == ["pass", "fail"]
    assert d["info"]["const"] == {"re": 0.0, "im": 0.25}
    assert "timing_ms" not in d
    assert r.to_json(timestamp=False) == r.to_json(timestamp=False)
    assert not r.passed and [c.name for c in r.failures()] == ["b"]
    assert "timing_ms" in json.loads(r.to_json())


def test_nan_residual_fails_and_merge_prefixes():
    r = VerificationReport("x")
    r.add("nan", float("nan"), 1.0)
    assert not r.passed
    m = merge("all", [r, VerificationReport("y")])
    assert m.checks[0].name == "x.nan"
    assert not VerificationReport("empty").passed


# -- factorization and connection ---------------------------------------------

def test_factorization_backends():
    assert verify_factorization("symbolic").passed
    r = verify_factorization("numeric", grids=(8,), radii=(1,))
    assert r.passed and r.check("numeric_difference_grid8_N1").residual <= 1e-12


@pytest.mark.parametrize("mutation", ["drop_dq_correction", "shift_connection_psi"])
def test_factorization_mutations_fail(mutation):
    r = verify_factorization("both", grids=(8,), radii=(1,), mutation=mutation)
    assert all(c.residual > 1e-3 for c in r.checks)
    with pytest.raises(ValueError):
        verify_factorization(mutation="bogus")


def test_connection_condition():
    r = verify_connection_condition(trials=10)
    assert r.passed, r.lines()
    xi, eta = (mono(n1=1), mono(n2=-1, a=1)), (mono(c=1), mono(d=1, b=2))
    assert connection_residual(xi, eta) <= 1e-13
    bad = verify_connection_condition(trials=0, mutation="shift_connection_psi")
    assert all(c.residual > 1e-3 for c in bad.checks)


def test_anticommutator_and_sum_of_squares():
    r = verify_anticommutator()
    assert r.passed and r.info["anticommutator_order"] == 1
    assert verify_anticommutator("drop_theta2").check("identity").residual > 1e-3
    assert sum_of_squares_residual() <= 1e-13


# -- curvature ------------------------------------------------------------------

@pytest.mark.parametrize("spec", [sphere_fibration, exact_fibration])
def test_flat_specs_have_no_obstruction(spec):
    r = verify_curvature_obstruction(spec())
    assert r.passed and r.info["curvature_vanishes"]
    assert r.check("difference_vanishes").residual <= 1e-13


def test_twisted_spec_gives_clifford_cube():
    r = verify_curvature_obstruction(twisted_fibration())
    assert r.check("difference_is_zeroth_order").passed
    assert r.check("proportional_to_clifford_cube").passed
    assert abs(abs(r.info["constant_all_pairs"]) - 1 / 8) < 1e-12
    assert abs(r.info["ratio_to_reference"]) == pytest.approx(1.0)


@pytest.mark.parametrize("mutation", ["drop_mean_curvature", "drop_base_correction"])
def test_curvature_mutations_fail(mutation):
    r = verify_curvature_obstruction(mutation=mutation)
    assert max(c.residual for c in r.checks) > 1e-3


# -- localization -------------------------------------------------------------

def test_kappa_examples():
    assert kappa_sup(LocalizingElement((np.pi / 4,) * 2 + (0.0, 0.0))) == pytest.approx(0.5, abs=1e-14)
    box = LocalizingElement()
    corner = float(kappa_expression().evaluate(np.pi / 6, np.pi / 6).real)
    assert kappa_sup(box) == pytest.approx(corner, rel=1e-12)
    assert kappa_bound(box) == pytest.approx(1.01 * corner, rel=1e-12)
    assert kappa_sup(LocalizingElement((0.0, 0.3, -0.1, 0.1))) == np.inf


@pytest.mark.parametrize("box", [(0.5, 0.4, 0, 0.1), (0, 0.1, 0.2, 0.1), (np.nan, 1, 0, 1)])
def test_empty_support(box):
    with pytest.raises(EmptySupport):
        LocalizingElement(box)


box_strategy = st.tuples(
    st.floats(0.1, 0.7), st.floats(0.0, 0.6), st.floats(-1.2, 1.0), st.floats(0.0, 0.3),
).map(lambda t: (t[0], min(t[0] + t[1], 1.45), t[2], min(t[2] + t[3], 1.3)))


@given(box_strategy, st.floats(0.0, 0.1))
@settings(max_examples=40, deadline=None)
def test_kappa_monotone_under_inclusion(box, pad):
    inner = LocalizingElement(box)
    a, b, c, d = box
    outer = LocalizingElement((max(a - pad, 0.05), min(b + pad, 1.5), max(c - pad, -1.5), min(d + pad, 1.5)))
    assert kappa_sup(outer) >= kappa_sup(inner) * (1 - 1e-12)
    P, S = np.meshgrid(np.linspace(a, b, 7), np.linspace(c, d, 7))
    assert np.all(kappa_expression().evaluate(P, S).real <= kappa_sup(inner) * (1 + 1e-12))


def test_bump_is_localized():
    x = LocalizingElement()
    assert x(np.pi / 4, 0.0) == 1.0
    assert x(0.1, 0.0) == 0.0 and x(np.pi / 4, 1.0) == 0.0
    v = x(np.linspace(0, 1.5, 50), 0.3)
    assert np.all((v >= 0) & (v <= 1))


def test_localized_form_small_grid():
    g, ms = GridSpec(12), ModeSet(1)
    V, T = _localized_operators(g, ms)
    x = LocalizingElement()
    mins = localized_form_minimum(V, T, x)
    assert abs(mins[(0, 0)]) < 1e-12
    assert min(mins.values()) >= -1.05 * kappa_bound(x)
    with pytest.raises(EmptySupport):
        localized_form_minimum(V, T, LocalizingElement((0.01, 0.02, 0.0, 0.01)))


def test_garding_mode_zero():
    r = garding_ratios(LocalizingElement(), 16, modes=1, n_random=2)
    assert r["mode_0_0"] == 0.0
    assert all(np.isfinite(v) and v >= 0 for v in r.values())


# -- torus, sphere relations, eigenfamily pieces -------------------------------

def test_torus_suite_small():
    assert verify_torus(cases=50, seed=3).passed


def test_sphere_relations_suite():
    r = verify_sphere_relations(thetas=(0.0, 0.5), modes=2, grid=4)
    assert r.passed, r.lines()


def test_eigen_pieces():
    P, S = GridSpec(8).mesh()
    assert eigen_equation_residual(2, -1, P, S) <= 1e-12
    assert orthonormality_residual(1, *GridSpec(32).mesh()) <= 1e-8
