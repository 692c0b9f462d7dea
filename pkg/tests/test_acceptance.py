"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""
import time

import pytest

from toricfact.geometry import exact_fibration, sphere_fibration, twisted_fibration
from toricfact.kk_verify import (
    verify_anticommutator, verify_commutator, verify_curvature_obstruction, verify_eigenfamily,
    verify_factorization, verify_local_positivity, verify_sphere_relations, verify_spectrum, verify_torus,
)
from toricfact.operators.symbolic import build_D_S4, tensor_sum
from toricfact.symcalc import is_zero


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number:>2} {title}: {detail}")
        assert ok, detail
    return emit


def timed(fn, *args, **kwargs):
    start = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - start


def test_01_symbolic_factorization(verdict):
    (_, residual), sec = timed(is_zero, tensor_sum() - build_D_S4())
    verdict(1, "symbolic factorization", residual <= 1e-13 and sec < 1,
            f"residual={residual:.2e} time={sec:.2f}s")


def test_02_numeric_factorization(verdict):
    r, sec = timed(verify_factorization, "numeric", grids=(16, 32), radii=(1, 2, 3))
    worst = max(c.residual for c in r.checks)
    verdict(2, "numeric factorization", r.passed and len(r.checks) == 6 and worst <= 1e-12 and sec < 10,
            f"max entry difference={worst:.2e} over {len(r.checks)} cases time={sec:.2f}s")


def test_03_eigenfamily(verdict):
    r, sec = timed(verify_eigenfamily, radius=5, grid=32, mus=(0.5, 1.0, 2.0))
    res = {c.name: c.residual for c in r.checks}
    ok = r.passed and res["eigen_equation"] <= 1e-12 and res["orthonormality"] <= 1e-8 and sec < 10
    ok = ok and all(res[f"resolvent_mu{m:g}"] <= 1e-12 for m in (0.5, 1, 2))
    verdict(3, "eigenfamily", ok, " ".join(f"{k}={v:.1e}" for k, v in res.items()) + f" time={sec:.2f}s")


def test_04_anticommutator(verdict):
    r, sec = timed(verify_anticommutator)
    order2, ident = r.check("second_order_part").residual, r.check("identity").residual
    verdict(4, "anticommutator identity", max(order2, ident) <= 1e-13 and sec < 1,
            f"order-2 part={order2:.1e} identity={ident:.1e} time={sec:.2f}s")


def test_05_local_positivity(verdict):
    r, sec = timed(verify_local_positivity, trials=100, grid=32, modes=3)
    kappa, low = r.info["kappa"], r.info["min_eigenvalue"]
    ok = r.passed and low >= -1.05 * kappa and sec < 60
    verdict(5, "local positivity", ok,
            f"kappa={kappa:.4f} min eigenvalue={low:.4f} bound={-1.05 * kappa:.4f} "
            f"trials ok={r.check('random_localized_sections').passed} time={sec:.1f}s")


@pytest.mark.slow
def test_06_spectrum_convergence(verdict):
    r, sec = timed(verify_spectrum, radius=2, grids=(64, 128), lowest=8)
    g64, g128 = r.info["grid64"], r.info["grid128"]
    detail = (f"lowest 64^2={g64['lowest']:.4f} 128^2={g128['lowest']:.4f} in sector {g128['lowest_sector']}; "
              f"count in window={g128['count_in_window']} (soft, smearing {r.info['cluster_smearing']}); "
              f"time={sec:.0f}s")
    verdict(6, "spectrum convergence", r.passed, detail)


def test_07_torus(verdict):
    r, sec = timed(verify_torus, cases=1000)
    worst = max(c.residual for c in r.checks)
    verdict(7, "noncommutative torus", r.passed and worst <= 1e-13 and sec < 5,
            f"max residual={worst:.1e} over 1000 cases time={sec:.2f}s")


def test_08_sphere_relations(verdict):
    r, sec = timed(verify_sphere_relations, thetas=(0.0, 1 / 3, 0.5, 0.237))
    rel = max(c.residual for c in r.checks if c.name.startswith("sphere_relation"))
    classical = r.check("classical_multiplication_theta0.0000").residual
    verdict(8, "deformed sphere relations", r.passed and rel <= 1e-12 and classical <= 1e-15 and sec < 5,
            f"relation residual={rel:.1e} classical(θ=0)={classical:.1e} time={sec:.2f}s")


def test_09_commutator(verdict):
    r, sec = timed(verify_commutator, theta12=0.237, radii=(8, 16), grid=8)
    drift = r.check("drift").residual
    verdict(9, "commutator boundedness", r.passed and drift < 0.01 and sec < 60,
            f"norms={[round(v, 6) for v in r.info['norms']]} drift={drift:.1e} time={sec:.1f}s")


def test_10_curvature(verdict):
    start = time.perf_counter()
    flat = [verify_curvature_obstruction(f()) for f in (sphere_fibration, exact_fibration)]
    twisted = verify_curvature_obstruction(twisted_fibration())
    sec = time.perf_counter() - start
    flat_res = max(r.check("difference_vanishes").residual for r in flat)
    zeroth = twisted.check("difference_is_zeroth_order").residual
    prop = twisted.check("proportional_to_clifford_cube").residual
    c = twisted.info["constant_all_pairs"]
    ok = all(r.passed for r in flat) and flat_res <= 1e-13 and zeroth <= 1e-13 and prop <= 1e-12 and sec < 5
    verdict(10, "curvature obstruction", ok,
            f"flat residual={flat_res:.1e}; twisted: derivative part={zeroth:.1e} cube fit={prop:.1e} "
            f"|const|={abs(c):.6f} vs 1/8 (const={c:.4g}, ratio to -i/8={twisted.info['ratio_to_reference']:.3g}) "
            f"time={sec:.2f}s")


def test_11_mutation_controls(verdict):
    runs = {
        "factorization/drop_dq_correction": verify_factorization("both", grids=(16,), radii=(1,),
                                                                 mutation="drop_dq_correction"),
        "factorization/shift_connection_psi": verify_factorization("symbolic", mutation="shift_connection_psi"),
        "anticommutator/drop_theta2": verify_anticommutator("drop_theta2"),
        "curvature/drop_mean_curvature": verify_curvature_obstruction(mutation="drop_mean_curvature"),
        "curvature/drop_base_correction": verify_curvature_obstruction(mutation="drop_base_correction"),
    }
    worst = {k: max(c.residual for c in r.failures()) if r.failures() else 0.0 for k, r in runs.items()}
    verdict(11, "mutation controls", all(v > 1e-3 for v in worst.values()),
            " ".join(f"{k}={v:.3g}" for k, v in worst.items()))
