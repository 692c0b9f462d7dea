"""Exact (ring-level) verification suites: factorization, connection condition,
anticommutator identity, sum-of-squares decomposition, curvature obstruction."""
from __future__ import annotations

import numpy as np

from ..geometry import FibrationSpec, curvature_form, sphere_fibration
from ..operators.gammas import GAMMA_X, I2, SIGMA1, SIGMA2, vertical
from ..operators.numeric import GridSpec, ModeSet, assemble_numeric
from ..operators.symbolic import (
    SEC_PSI, TAN_PSI, build_connection, build_D_Q, build_D_S4, build_D_V, build_D_V_parts,
    build_T_parts, clifford_curvature, connection_lift, fibration_tensor_sum, frame_dirac,
    kappa_expression, op_kron, tensor_sum, tensor_sum_kron, vertical_lift,
)
from ..report import VerificationReport
from ..symcalc import (
    ZERO, ZERO_TOL, MatrixDiffOp, MatrixFun, TrigLaurentFun, anticommutator, is_zero, kron, mono,
    pythagorean_normal_form,
)

NUMERIC_TOL = 1e-12

FACTORIZATION_MUTATIONS = {
    None: {},
    "drop_dq_correction": {"d_q": lambda: build_D_Q(correction=False)},
    "shift_connection_psi": {"connection": lambda: build_connection(psi_shift=TAN_PSI)},
}


def _mutated_tensor_sum(mutation: str | None) -> MatrixDiffOp:
    if mutation not in FACTORIZATION_MUTATIONS:
        raise ValueError(f"unknown mutation {mutation!r}; choose from {sorted(k for k in FACTORIZATION_MUTATIONS if k)}")
    kwargs = {k: f() for k, f in FACTORIZATION_MUTATIONS[mutation].items()}
    return tensor_sum(**kwargs)


def verify_factorization(backend: str = "symbolic", grids=(16, 32), radii=(1, 2, 3),
                         mutation: str | None = None, rule: str = "uniform") -> VerificationReport:
    """Compare the tensor-sum operator with the directly written sphere operator."""
    if backend not in ("symbolic", "numeric", "both"):
        raise ValueError("backend must be symbolic, numeric or both")
    report = VerificationReport("factorization", {"backend": backend, "mutation": mutation})
    with report.timed():
        lhs = _mutated_tensor_sum(mutation)
        ref = build_D_S4()
        if backend in ("symbolic", "both"):
            _, r = is_zero(lhs - ref)
            report.add("symbolic_difference", r, ZERO_TOL)
        if backend in ("numeric", "both"):
            report.params.update(grids=list(grids), radii=list(radii), rule=rule)
            for n in grids:
                g = GridSpec(n, n, rule)
                for N in radii:
                    ms = ModeSet(N)
                    diff = assemble_numeric(lhs, g, ms) - assemble_numeric(ref, g, ms)
                    report.add(f"numeric_difference_grid{n}_N{N}", diff.max_abs(), NUMERIC_TOL, grid=n, modes=N)
    return report


# ---------------------------------------------------------------------------
# connection condition on product sections
# ---------------------------------------------------------------------------


def _tensor(xi, eta) -> list:
    """Components of ξ (x) η in the C^4 ordering: index 2 t + s holds η_t ξ_s."""
    return [eta[t] * xi[s] for t in range(2) for s in range(2)]


def _matvec(m: np.ndarray, v) -> list:
    return [sum((v[j] * complex(m[i, j]) for j in range(len(v)) if m[i, j] != 0), ZERO) for i in range(len(v))]


def _section_residual(a, b) -> float:
    return max(pythagorean_normal_form(x - y)[0].max_abs() for x, y in zip(a, b))


def connection_residual(xi, eta, d_q: MatrixDiffOp | None = None, connection: tuple | None = None) -> float:
    """Residual of the connection condition on the product section ξ (x) η.

    (D_V x_∇ D)(ξ ⊗ η) - γ_X ξ ⊗ D η is compared with
    D_V ξ ⊗ η + γ_X ∇_φ ξ secψ ⊗ iσ¹ η + γ_X ∇_ψ ξ ⊗ iσ² η.
    ``connection`` replaces ∇ inside the tensor sum only (mutation control).
    """
    d_q = build_D_Q() if d_q is None else d_q
    nabla_phi, nabla_psi = build_connection()
    xi, eta = list(xi), list(eta)
    lhs = tensor_sum_kron(d_q=d_q, connection=connection).apply(_tensor(xi, eta))
    sub = _tensor(_matvec(GAMMA_X, xi), d_q.apply(eta))
    lhs = [a - b for a, b in zip(lhs, sub)]

    dphi = [nabla_phi.apply([s])[0] * SEC_PSI for s in xi]
    dpsi = [nabla_psi.apply([s])[0] for s in xi]
    rhs = _tensor(build_D_V().apply(xi), eta)
    for part, sigma in ((dphi, SIGMA1), (dpsi, SIGMA2)):
        extra = _tensor(_matvec(GAMMA_X, part), _matvec(1j * sigma, eta))
        rhs = [a + b for a, b in zip(rhs, extra)]
    return _section_residual(lhs, rhs)


def random_monomial(rng: np.random.Generator, modes: bool = True) -> TrigLaurentFun:
    n1, n2 = (rng.integers(-2, 3, size=2) if modes else (0, 0))
    a, b, c = rng.integers(0, 4, size=3)
    d = rng.integers(0, 3)
    coeff = complex(rng.normal(), rng.normal())
    return mono(int(n1), int(n2), int(a), int(b), int(c), int(d), coeff)


def default_connection_sections() -> list:
    """(label, ξ, η) test pairs: an eigenfamily numerator, a constant section, a bump."""
    bump = mono(a=2, b=2, c=2)
    numer = mono(n1=1)
    return [
        ("eigen_numerator_bump", (numer, numer), (bump, mono(d=1) * bump)),
        ("constant_vertical", (mono(), ZERO), (bump, bump * 0.5j)),
    ]


def verify_connection_condition(xi=None, eta=None, trials: int = 20, seed: int = 0,
                                mutation: str | None = None) -> VerificationReport:
    """Connection condition on given and on randomized monomial product sections."""
    if mutation not in (None, "shift_connection_psi"):
        raise ValueError(f"unknown mutation {mutation!r}")
    report = VerificationReport("connection", {"trials": trials, "seed": seed, "mutation": mutation})
    conn = build_connection(psi_shift=TAN_PSI) if mutation else None
    with report.timed():
        cases = default_connection_sections() if xi is None else [("given", tuple(xi), tuple(eta))]
        for label, x, e in cases:
            report.add(label, connection_residual(x, e, connection=conn), ZERO_TOL)
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(trials):
            x = (random_monomial(rng), random_monomial(rng))
            e = (random_monomial(rng, modes=False), random_monomial(rng, modes=False))
            worst = max(worst, connection_residual(x, e, connection=conn))
        if trials:
            report.add("random_monomial_pairs", worst, NUMERIC_TOL, trials=trials)
    return report


# ---------------------------------------------------------------------------
# anticommutator and sum of squares
# ---------------------------------------------------------------------------


def lifted_pair(drop_theta2: bool = False) -> tuple:
    """(D_V ⊗ 1, (γ_X ⊗ 1)(1 ⊗_∇ D)) in the C^2 (x) C^2 ordering."""
    p = vertical_lift(build_D_V(drop_theta2=drop_theta2))
    q = vertical(GAMMA_X) @ connection_lift(build_D_Q(), build_connection())
    return p, q


def anticommutator_rhs() -> MatrixDiffOp:
    """i γ_X D_V' ⊗ T' - i γ_X D_V'' ⊗ T''."""
    d1, d2 = build_D_V_parts()
    t1, t2 = build_T_parts()
    out = MatrixDiffOp(4)
    for d, t, sign in ((d1, t1, 1j), (d2, t2, -1j)):
        out = out + MatrixDiffOp.multiplication(kron(t, I2), 4) @ op_kron(I2, GAMMA_X @ d) * sign
    return out


def verify_anticommutator(mutation: str | None = None) -> VerificationReport:
    """{D_V ⊗ 1, (γ_X ⊗ 1)(1 ⊗_∇ D)} against its first-order closed form."""
    if mutation not in (None, "drop_theta2"):
        raise ValueError(f"unknown mutation {mutation!r}")
    report = VerificationReport("anticommutator", {"mutation": mutation})
    with report.timed():
        p, q = lifted_pair(drop_theta2=mutation == "drop_theta2")
        ac = anticommutator(p, q)
        report.add("second_order_part", ac.part(2).max_abs(), ZERO_TOL)
        report.add("identity", is_zero(ac - anticommutator_rhs())[1], ZERO_TOL)
        report.info["anticommutator_order"] = ac.order
    return report


def sum_of_squares_residual() -> float:
    """Residual of the decomposition behind the local positivity estimate.

    (D_V'⊗1 + ½iγ_X⊗T')(D_V'⊗1 - ½iγ_X⊗T') + (D_V''⊗1 - ½iγ_X⊗T'')(D_V''⊗1 + ½iγ_X⊗T'')
        = D_V²⊗1 + ¼(T'² + T''²) + {D_V⊗1, (γ_X⊗1)(1⊗_∇D)}
    with ¼(T'² + T''²) the scalar bound function.
    """
    d1, d2 = build_D_V_parts()
    t1, t2 = build_T_parts()
    a1, a2 = op_kron(I2, d1), op_kron(I2, d2)
    b1 = MatrixDiffOp.multiplication(kron(t1, GAMMA_X), 4) * 0.5j
    b2 = MatrixDiffOp.multiplication(kron(t2, GAMMA_X), 4) * 0.5j
    lhs = (a1 + b1) @ (a1 - b1) + (a2 - b2) @ (a2 + b2)
    d_v = build_D_V()
    p, q = lifted_pair()
    kappa = MatrixDiffOp.multiplication(MatrixFun.from_scalar(kappa_expression(), np.eye(4)), 4)
    rhs = op_kron(I2, d_v @ d_v) + kappa + anticommutator(p, q)
    square = (t1 @ t1 + t2 @ t2) * 0.25 - MatrixFun.from_scalar(kappa_expression(), I2)
    return max(is_zero(lhs - rhs)[1], square.max_abs())


# ---------------------------------------------------------------------------
# curvature obstruction for general torus fibrations
# ---------------------------------------------------------------------------


CURVATURE_MUTATIONS = (None, "drop_mean_curvature", "drop_base_correction")
REFERENCE_CONSTANT = -1j / 8


def _proportionality(delta: MatrixFun, cube: MatrixFun) -> complex:
    """Least-squares constant c with delta ≈ c * cube over sample points."""
    rng = np.random.default_rng(1)
    phi = rng.uniform(0.1, 1.4, 64)
    psi = rng.uniform(-1.4, 1.4, 64)
    d = delta.evaluate(phi, psi).ravel()
    c = cube.evaluate(phi, psi).ravel()
    return complex(np.vdot(c, d) / np.vdot(c, c))


def verify_curvature_obstruction(spec: FibrationSpec | None = None,
                                 mutation: str | None = None) -> VerificationReport:
    """Tensor sum minus the frame-built total Dirac operator for a torus fibration."""
    if mutation not in CURVATURE_MUTATIONS:
        raise ValueError(f"unknown mutation {mutation!r}")
    spec = sphere_fibration() if spec is None else spec
    report = VerificationReport("curvature", {"spec": spec.name, "mutation": mutation})
    with report.timed():
        ts = fibration_tensor_sum(spec, mean_curvature=mutation != "drop_mean_curvature",
                                  base_correction=mutation != "drop_base_correction")
        delta = ts - frame_dirac(spec)
        report.add("difference_is_zeroth_order", max(delta.part(1).max_abs(), delta.part(2).max_abs()), ZERO_TOL)
        omega = curvature_form(spec)
        zeroth = delta.zeroth_order()
        flat = omega.is_zero()
        report.info["curvature_vanishes"] = flat
        if flat:
            report.add("difference_vanishes", is_zero(zeroth, pythagorean=True)[1], ZERO_TOL)
            return report
        cube = clifford_curvature(spec)
        const = _proportionality(zeroth, cube)
        resid = is_zero(zeroth - cube * const, pythagorean=True)[1]
        report.add("proportional_to_clifford_cube", resid, 1e-12)
        # the ordered-pair convention sums both (e_u, e_v) and (e_v, e_u): half the constant
        all_pairs = const / 2
        report.add("modulus_vs_one_eighth", abs(abs(all_pairs) - 1 / 8), 1e-12, convention="all ordered pairs")
        report.info.update(
            constant_i_lt_j=const,
            constant_all_pairs=all_pairs,
            reference=REFERENCE_CONSTANT,
            ratio_to_reference=all_pairs / REFERENCE_CONSTANT,
        )
    return report
