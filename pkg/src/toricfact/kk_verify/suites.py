"""Numeric suites: noncommutative torus laws, deformed sphere relations,
eigenfamily of the vertical operator, sector spectra and commutator bounds."""
from __future__ import annotations

import numpy as np

from ..geometry import W_S4, W_X
from ..nc_torus import (
    DeformationMatrix, TorusPoly, TruncatedGNSRep, gns_inner, product, star, trace,
)
from ..operators.eigen import eigen_family, resolvent_series, vertical_symbol
from ..operators.numeric import GridSpec, ModeSet
from ..operators.spectrum import count_in_window, sector_spectrum, sectors
from ..operators.symbolic import build_D_S4, build_D_V
from ..report import VerificationReport
from ..symcalc import mono
from ..theta_deform import (
    DeformedElement, commutator_norm, sphere_elements, sphere_relations_check,
)

DEFAULT_THETAS = (0.0, 1 / 3, 1 / 2, 0.237)


# ---------------------------------------------------------------------------
# noncommutative torus
# ---------------------------------------------------------------------------


def random_deformation(rng: np.random.Generator, n: int) -> DeformationMatrix:
    a = rng.uniform(-1, 1, size=(n, n))
    return DeformationMatrix(np.triu(a, 1) - np.triu(a, 1).T)


def random_poly(rng: np.random.Generator, theta: DeformationMatrix, terms: int = 3, degree: int = 2) -> TorusPoly:
    """Random element with unit l1 norm, so products keep coefficients of order one."""
    coeffs = {}
    for _ in range(terms):
        k = tuple(int(v) for v in rng.integers(-degree, degree + 1, size=theta.n))
        coeffs[k] = coeffs.get(k, 0) + complex(rng.normal(), rng.normal())
    total = sum(abs(v) for v in coeffs.values())
    return TorusPoly(theta, {k: v / total for k, v in coeffs.items()})


def _diff(x: TorusPoly, y: TorusPoly) -> float:
    """Unclipped coefficient difference (subtraction would drop entries below the zero threshold)."""
    keys = set(x.coeffs) | set(y.coeffs)
    return max((abs(x.coeffs.get(k, 0) - y.coeffs.get(k, 0)) for k in keys), default=0.0)


def verify_torus(cases: int = 1000, seed: int = 0) -> VerificationReport:
    """Associativity, generator relations, *-antimultiplicativity, trace positivity,
    orthonormality of the U^k, and exactness of the truncated GNS representation."""
    report = VerificationReport("torus", {"cases": cases, "seed": seed})
    rng = np.random.default_rng(seed)
    worst = dict.fromkeys(("associativity", "generator_relation", "star_antimultiplicative",
                           "trace_positivity", "orthonormality", "truncated_gns"), 0.0)
    with report.timed():
        for case in range(cases):
            n = 2 if case % 2 == 0 else 3
            th = random_deformation(rng, n)
            x, y, z = (random_poly(rng, th) for _ in range(3))
            worst["associativity"] = max(worst["associativity"],
                                         _diff(product(product(x, y), z), product(x, product(y, z))))
            m, l = rng.choice(n, size=2, replace=False) + 1
            um, ul = TorusPoly.generator(th, m), TorusPoly.generator(th, l)
            lhs = product(um, ul)
            rhs = product(ul, um) * np.exp(2j * np.pi * th.matrix[m - 1, l - 1])
            worst["generator_relation"] = max(worst["generator_relation"], _diff(lhs, rhs))
            worst["star_antimultiplicative"] = max(worst["star_antimultiplicative"],
                                                   _diff(star(product(x, y)), product(star(y), star(x))))
            # τ(x* x) = Σ |x_k|², which is also the faithfulness statement
            t = trace(product(star(x), x))
            direct = sum(abs(v) ** 2 for v in x.coeffs.values())
            worst["trace_positivity"] = max(worst["trace_positivity"], abs(t - direct), max(0.0, -t.real))
            k1 = tuple(int(v) for v in rng.integers(-3, 4, size=n))
            k2 = k1 if case % 3 == 0 else tuple(int(v) for v in rng.integers(-3, 4, size=n))
            ip = gns_inner(TorusPoly.monomial(th, k1), TorusPoly.monomial(th, k2))
            worst["orthonormality"] = max(worst["orthonormality"], abs(ip - (1.0 if k1 == k2 else 0.0)))
            if case % 10 == 0:
                rep = TruncatedGNSRep(th, 4)
                cols = rep.interior(4)
                vec = rep.matrix(x)[:, cols].toarray()[:, 0]
                inner = rep.matrix(product(star(x), x)).toarray()[cols[0], cols[0]]
                worst["truncated_gns"] = max(worst["truncated_gns"],
                                             float(np.max(np.abs(vec - rep.vector(x)))), abs(inner - t))
        for name, value in worst.items():
            report.add(name, value, 1e-13)
    return report


# ---------------------------------------------------------------------------
# deformed sphere relations
# ---------------------------------------------------------------------------


def verify_sphere_relations(thetas=DEFAULT_THETAS, modes: int = 3, grid: int = 6) -> VerificationReport:
    report = VerificationReport("sphere-relations", {"thetas": list(thetas), "modes": modes, "grid": grid})
    with report.timed():
        for th in thetas:
            res = sphere_relations_check(th, ModeSet(modes), GridSpec(grid, grid))
            for name, value in res.as_checks():
                report.add(f"{name}_theta{th:.4f}", value, 1e-12, theta=th)
            report.add(f"phase_modulus_theta{th:.4f}", abs(abs(res.commutation_phase) - 1), 1e-15)
    return report


# ---------------------------------------------------------------------------
# eigenfamily of the vertical operator
# ---------------------------------------------------------------------------


def _mode_box(radius: int) -> list:
    r = range(-radius, radius + 1)
    return [(a, b) for a in r for b in r]


def eigen_equation_residual(n1: int, n2: int, phi, psi) -> float:
    """max |S v_± ± λ v_±| / max(λ, 1) over nodes, v_± the unit vectors (1, ±c)/√2."""
    fam = eigen_family(n1, n2)
    S = vertical_symbol(n1, n2, phi, psi)
    lam = fam.lam(phi, psi)
    worst = 0.0
    for sign in (1, -1):
        v = fam.unit_vector(sign, phi, psi)
        r = np.einsum("...ij,...j->...i", S, v) + sign * lam[..., None] * v
        worst = max(worst, float(np.max(np.linalg.norm(r, axis=-1) / np.maximum(lam, 1))))
    return worst


def orthonormality_residual(radius: int, phi, psi) -> float:
    """max |⟨Ψ^ε_n, Ψ^ε'_m⟩_X - δ| over nodes, by equispaced torus quadrature.

    (2 radius + 1)² angles integrate every product of two modes of the box exactly.
    """
    modes = _mode_box(radius)
    m = 2 * radius + 1
    t = 2 * np.pi * np.arange(m) / m
    T1, T2 = np.meshgrid(t, t, indexing="ij")
    phases = np.exp(1j * (np.outer(T1.ravel(), [n[0] for n in modes]) + np.outer(T2.ravel(), [n[1] for n in modes])))
    # angular quadrature of conj(e_n) e_m, shared by every node
    F = phases.conj().T @ phases / phases.shape[0]
    F = np.repeat(np.repeat(F, 2, axis=0), 2, axis=1)
    spinors = np.stack([eigen_family(a, b).spinor(sign, phi, psi) for a, b in modes for sign in (1, -1)],
                       axis=1)                                     # (nodes, family, 2)
    pointwise = spinors.conj() @ spinors.transpose(0, 2, 1)        # (nodes, family, family)
    G = F[None] * pointwise * W_X.evaluate(phi, psi).real[:, None, None]
    return float(np.max(np.abs(G - np.eye(F.shape[0])[None])))


def resolvent_residual(mu: float, n1: int, n2: int, phi, psi) -> float:
    K = resolvent_series(mu, n1, n2, phi, psi)
    direct = np.linalg.inv(1j * mu * np.eye(2) + vertical_symbol(n1, n2, phi, psi))
    return float(np.max(np.abs(K - direct)))


def verify_eigenfamily(radius: int = 5, grid: int = 32, mus=(0.5, 1.0, 2.0)) -> VerificationReport:
    report = VerificationReport("eigenfamily", {"radius": radius, "grid": grid, "mus": list(mus)})
    with report.timed():
        g = GridSpec(grid, grid)
        P, S = g.mesh()
        modes = _mode_box(radius)
        report.add("eigen_equation", max(eigen_equation_residual(a, b, P, S) for a, b in modes), 1e-12)
        report.add("orthonormality", orthonormality_residual(radius, P, S), 1e-8)
        for mu in mus:
            report.add(f"resolvent_mu{mu:g}", max(resolvent_residual(mu, a, b, P, S) for a, b in modes), 1e-12)
        sub = (P > 0.3) & (P < 1.2) & (np.abs(S) < 0.8)
        growth = [float(np.min(eigen_family(n, 0).lam(P[sub], S[sub]))) for n in range(1, radius + 1)]
        report.info["lambda_min_on_subbox"] = growth
        report.add("lambda_growth", 0.0 if np.all(np.diff(growth) > 0) else 1.0, 0.0)
    return report


# ---------------------------------------------------------------------------
# sector spectra of the assembled sphere operator
# ---------------------------------------------------------------------------


TARGET_WINDOW = (1.90, 2.10)


def verify_spectrum(radius: int = 2, grids=(64, 128), lowest: int = 8,
                    half_integer_probe: bool = True) -> VerificationReport:
    """Lowest |λ| over integer mode sectors, its refinement behavior, and diagnostics."""
    report = VerificationReport("spectrum", {"radius": radius, "grids": list(grids), "lowest": lowest,
                                             "window": list(TARGET_WINDOW)})
    lo, hi = TARGET_WINDOW
    target = 0.5 * (lo + hi)
    with report.timed():
        best = {}
        per_grid = {}
        for n in grids:
            spectra = [sector_spectrum(n, a, b, lowest) for a, b in sectors(radius)]
            per_grid[n] = spectra
            low = min(spectra, key=lambda s: s.lowest)
            best[n] = low.lowest
            report.info[f"grid{n}"] = {
                "lowest": low.lowest,
                "lowest_sector": [low.n1, low.n2],
                "per_sector_lowest": {f"{s.n1:g},{s.n2:g}": s.lowest for s in spectra},
                "count_in_window": count_in_window(spectra, lo, hi),
            }
        fine = grids[-1]
        report.add("lowest_in_window", max(0.0, lo - best[fine], best[fine] - hi), 0.0,
                   grid=fine, lowest=best[fine])
        dist = [abs(best[n] - target) for n in grids]
        report.add("monotone_refinement", max([0.0] + [b - a for a, b in zip(dist, dist[1:])]), 0.0,
                   distances=dist)
        spectra = per_grid[fine]
        report.info["cluster_smearing"] = sorted({round(float(v), 4) for s in spectra
                                                  for v in s.singular_values if lo <= v <= hi})
        if half_integer_probe:
            probe = [sector_spectrum(fine, a, b, 4) for a, b in ((0.5, 0.5), (-0.5, 0.5), (0.5, -0.5), (-0.5, -0.5))]
            report.info["half_integer_lowest"] = {f"{s.n1:g},{s.n2:g}": s.lowest for s in probe}
    return report


# ---------------------------------------------------------------------------
# commutator boundedness
# ---------------------------------------------------------------------------


def verify_commutator(theta12: float = 0.237, radii=(8, 16), grid: int = 8,
                      drift_tol: float = 0.01) -> VerificationReport:
    report = VerificationReport("commutator", {"theta": theta12, "radii": list(radii), "grid": grid})
    with report.timed():
        g = GridSpec(grid, grid)
        a = sphere_elements()["a"]
        res = commutator_norm(build_D_S4(), a, radii, g, weight=W_S4, theta12=theta12)
        report.info["norms"] = res.norms
        report.add("drift", max(res.drift), drift_tol, norms=res.norms)
        inv = DeformedElement.invariant(mono(d=1))
        small = commutator_norm(build_D_V(), inv, (2,), g, theta12=theta12)
        report.add("invariant_commutes_with_vertical", small.norms[0], 1e-12)
    return report
