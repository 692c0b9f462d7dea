"""Localized estimates on compact sub-boxes of the quadrant: the bound κ_x,
local positivity of the symmetrized form, and the Gårding-type ratio."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from ..errors import EmptySupport
from ..geometry import W_S4
from ..operators.eigen import eigen_family
from ..operators.numeric import GridSpec, ModeGridOperator, ModeSet, assemble_numeric
from ..operators.symbolic import kappa_expression, lift_vertical, tensor_sum
from ..report import VerificationReport
from .algebraic import sum_of_squares_residual

DEFAULT_SUPPORT = (np.pi / 6, np.pi / 3, -np.pi / 6, np.pi / 6)


def _bump(t):
    """Piecewise-polynomial C² bump (1 - t²)³ on [-1, 1], 1 at the center, 0 outside."""
    t = np.asarray(t, float)
    return np.where(np.abs(t) < 1, (1 - np.minimum(t ** 2, 1)) ** 3, 0.0)


@dataclass(frozen=True)
class LocalizingElement:
    """Invariant bump f(φ, ψ) with 0 <= f <= 1 supported in a closed box.

    ``box = (phi_lo, phi_hi, psi_lo, psi_hi)``; a degenerate box is a point.
    """

    box: tuple = DEFAULT_SUPPORT

    def __post_init__(self):
        a, b, c, d = (float(v) for v in self.box)
        if not (np.all(np.isfinite([a, b, c, d])) and a <= b and c <= d):
            raise EmptySupport(f"support box {self.box} is empty")
        object.__setattr__(self, "box", (a, b, c, d))

    @property
    def is_point(self) -> bool:
        a, b, c, d = self.box
        return a == b and c == d

    def contains(self, phi, psi) -> np.ndarray:
        a, b, c, d = self.box
        phi, psi = np.asarray(phi), np.asarray(psi)
        return (phi >= a) & (phi <= b) & (psi >= c) & (psi <= d)

    def __call__(self, phi, psi) -> np.ndarray:
        a, b, c, d = self.box
        if a == b or c == d:
            return np.zeros(np.broadcast(np.asarray(phi), np.asarray(psi)).shape)
        tp = (2 * np.asarray(phi, float) - (a + b)) / (b - a)
        ts = (2 * np.asarray(psi, float) - (c + d)) / (d - c)
        return _bump(tp) * _bump(ts)


def kappa_sup(x: LocalizingElement, samples: int = 201) -> float:
    """Max of the bound function over the support (fine sampling plus corners).

    The function increases with |ψ| and is convex in φ, so the maximum is at
    a corner; the sampling is kept as an independent check.  Supports that
    touch φ ∈ {0, π/2} or |ψ| = π/2 give inf.
    """
    a, b, c, d = x.box
    P, S = np.meshgrid(np.linspace(a, b, samples), np.linspace(c, d, samples), indexing="ij")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        vals = np.abs(kappa_expression().evaluate(P, S))
    vals = np.where(np.isfinite(vals), vals, np.inf)
    return float(np.max(vals))


def kappa_bound(x: LocalizingElement, samples: int = 201, inflation: float = 0.01) -> float:
    """κ_x: the sampled supremum inflated by a relative safety margin."""
    return kappa_sup(x, samples) * (1 + inflation)


def _localized_operators(grid: GridSpec, modeset: ModeSet) -> tuple:
    V = assemble_numeric(lift_vertical(), grid, modeset, W_S4, "vertical")
    T = assemble_numeric(tensor_sum(), grid, modeset, W_S4, "tensor_sum")
    return V, T


def _support_unknowns(x: LocalizingElement, grid: GridSpec, size: int = 4) -> np.ndarray:
    P, S = grid.mesh()
    nodes = np.flatnonzero(x.contains(P, S))
    if nodes.size == 0:
        raise EmptySupport("no grid node lies in the support")
    return (nodes[:, None] * size + np.arange(size)[None, :]).ravel()


def localized_form_minimum(V: ModeGridOperator, T: ModeGridOperator, x: LocalizingElement) -> dict:
    """Per mode, the lowest generalized eigenvalue of 2 Re <V ζ, T ζ> against ‖ζ‖² on supported ζ."""
    cols = _support_unknowns(x, V.grid)
    q = V.quadrature_weights()
    out = {}
    for k in V.modeset:
        Vs = V.block(k)[:, cols].toarray()
        Ts = T.block(k)[:, cols].toarray()
        M = Vs.conj().T @ (q[:, None] * Ts)
        M = M + M.conj().T
        out[k] = float(la.eigh(M, np.diag(q[cols]), eigvals_only=True, subset_by_index=[0, 0])[0])
    return out


def _weighted_norm2(v: np.ndarray, q: np.ndarray) -> float:
    return float(np.sum(q[None, :] * np.abs(v) ** 2))


def h1_seminorm2(zeta: np.ndarray, grid: GridSpec, q: np.ndarray, size: int = 4) -> float:
    """Discrete Σ ‖∂_φ ζ‖² + ‖∂_ψ ζ‖² in the weighted quadrature."""
    total = 0.0
    for var in ("phi", "psi"):
        d = grid.derivative(var)
        for v in zeta:
            dv = (d @ v.reshape(grid.n_nodes, size))
            total += float(np.sum(q * np.abs(dv.ravel()) ** 2))
    return total


def verify_local_positivity(x: LocalizingElement | None = None, trials: int = 100, grid: int = 32,
                            modes: int = 3, seed: int = 0, eig_slack: float = 0.05) -> VerificationReport:
    """2 Re <(D_V⊗1)ζ, (D_V×_∇D)ζ> >= -κ_x ‖ζ‖² for sections localized by x."""
    x = LocalizingElement() if x is None else x
    report = VerificationReport("positivity", {"support": list(x.box), "grid": grid, "modes": modes,
                                               "trials": trials, "seed": seed})
    with report.timed():
        report.add("sum_of_squares_identity", sum_of_squares_residual(), 1e-13)
        kappa = kappa_bound(x)
        report.info["kappa"] = kappa
        g = GridSpec(grid, grid)
        ms = ModeSet(modes)
        V, T = _localized_operators(g, ms)
        mins = localized_form_minimum(V, T, x)
        worst = min(mins.values())
        report.info["min_eigenvalue"] = worst
        report.info["min_eigenvalue_mode00"] = mins[(0, 0)]
        # residual > 0 iff the lowest eigenvalue drops below -κ (1 + slack)
        report.add("localized_form_min_eigenvalue", max(0.0, -(worst + kappa * (1 + eig_slack))), 0.0,
                   kappa=kappa, min_eigenvalue=worst)

        rng = np.random.default_rng(seed)
        P, S = g.mesh()
        bump = np.repeat(x(P, S), 4)
        q = V.quadrature_weights()
        h2 = max(g.h) ** 2
        worst_gap = -np.inf
        for _ in range(trials):
            xi = rng.normal(size=(len(ms), q.size)) + 1j * rng.normal(size=(len(ms), q.size))
            zeta = xi * bump[None, :]
            form = 2 * np.real(np.sum(q[None, :] * np.conj(V.apply(zeta)) * T.apply(zeta)))
            allowance = 10 * h2 * h1_seminorm2(zeta, g, q)
            lower = -kappa * _weighted_norm2(zeta, q) - allowance
            worst_gap = max(worst_gap, (lower - form) / max(_weighted_norm2(zeta, q), 1e-300))
        if trials:
            report.add("random_localized_sections", max(0.0, worst_gap), 0.0, trials=trials)
            report.info["worst_relative_margin"] = -worst_gap
    return report


# ---------------------------------------------------------------------------
# Gårding-type ratio
# ---------------------------------------------------------------------------


def _trial_sections(x: LocalizingElement, grid: GridSpec, ms: ModeSet, n_random: int, seed: int) -> dict:
    """Smooth localized trial sections, identical continuum functions on every grid."""
    P, S = grid.mesh()
    bump = x(P, S)
    a, b, c, d = x.box
    tp = (P - a) / max(b - a, 1e-300)
    ts = (S - c) / max(d - c, 1e-300)
    out = {}
    fam = eigen_family(1, 0)
    psi_plus = fam.spinor(1, P, S)          # (nodes, 2) vertical spinor
    z = np.zeros((len(ms), grid.n_nodes, 4), dtype=complex)
    z[ms.index((1, 0)), :, 0:2] = psi_plus * bump[:, None]
    out["eigen_1_0_bump"] = z.reshape(len(ms), -1)
    z = np.zeros((len(ms), grid.n_nodes, 4), dtype=complex)
    z[ms.index((0, 0)), :, 1] = bump
    out["mode_0_0"] = z.reshape(len(ms), -1)
    rng = np.random.default_rng(seed)
    for t in range(n_random):
        z = np.zeros((len(ms), grid.n_nodes, 4), dtype=complex)
        for k in ms:
            coef = rng.normal(size=(4, 3)) + 1j * rng.normal(size=(4, 3))
            smooth = coef[:, 0][None, :] + coef[:, 1][None, :] * np.cos(np.pi * tp)[:, None] \
                + coef[:, 2][None, :] * np.sin(np.pi * ts)[:, None]
            z[ms.index(k)] = smooth * bump[:, None] / (1 + abs(k[0]) + abs(k[1])) ** 2
        out[f"random_{t}"] = z.reshape(len(ms), -1)
    return out


def garding_ratios(x: LocalizingElement, grid: int, modes: int = 3, n_random: int = 8, seed: int = 0) -> dict:
    g = GridSpec(grid, grid)
    ms = ModeSet(modes)
    V, T = _localized_operators(g, ms)
    q = V.quadrature_weights()
    ratios = {}
    for name, zeta in _trial_sections(x, g, ms, n_random, seed).items():
        num = np.sqrt(_weighted_norm2(V.apply(zeta), q))
        den = np.sqrt(_weighted_norm2(zeta, q)) + np.sqrt(_weighted_norm2(T.apply(zeta), q))
        ratios[name] = float(num / den) if den > 0 else 0.0
    return ratios


def verify_garding(x: LocalizingElement | None = None, grids=(16, 32, 64), modes: int = 3,
                   trials: int = 8, seed: int = 0, drift_tol: float = 0.10) -> VerificationReport:
    """Measure C_x = sup ‖(D_V⊗1)ζ‖ / (‖ζ‖ + ‖(D_V×_∇D)ζ‖) and check it stabilizes under refinement."""
    x = LocalizingElement() if x is None else x
    report = VerificationReport("garding", {"support": list(x.box), "grids": list(grids), "modes": modes,
                                            "trials": trials, "seed": seed})
    with report.timed():
        sups = []
        for n in grids:
            r = garding_ratios(x, n, modes, trials, seed)
            sups.append(max(r.values()))
            report.info[f"grid{n}"] = {"sup": sups[-1], "eigen_1_0_bump": r["eigen_1_0_bump"],
                                       "mode_0_0": r["mode_0_0"]}
        report.info["constant"] = sups[-1]
        report.add("mode_0_0_ratio", report.info[f"grid{grids[-1]}"]["mode_0_0"], 1e-14)
        report.add("ratio_bounded", 0.0 if np.all(np.isfinite(sups)) else np.inf, 0.0)
        drifts = {f"{n0}_to_{n1}": abs(s1 - s0) / s0
                  for (n0, s0), (n1, s1) in zip(zip(grids, sups), zip(grids[1:], sups[1:]))}
        report.info["drifts"] = drifts
        # coarse grids put only a handful of nodes across the support, so the
        # stabilization test reads the finest refinement step
        if drifts:
            name, value = list(drifts.items())[-1]
            report.add(f"drift_{name}", value, drift_tol, sup_coarse=sups[-2], sup_fine=sups[-1])
    return report
