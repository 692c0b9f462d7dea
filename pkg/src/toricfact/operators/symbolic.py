"""Exact Dirac-type operators on the principal stratum as MatrixDiffOp symbols.

Two-component operators act either on the vertical module (spinors along the
torus fibers) or on base spinors over the quadrant.  Four-component
operators use the identification C^2 (x) C^2 -> C^4, lambda (x) mu ->
(mu_1 lambda, mu_2 lambda): base index outer, vertical index inner.
"""
from __future__ import annotations

from itertools import combinations

import numpy as np

from ..geometry import FibrationSpec, curvature_form, levi_civita, sphere_mean_curvature
from ..symcalc import (
    ONE, ZERO, MatrixDiffOp, MatrixFun, TrigLaurentFun, kron, mono,
)
from .gammas import (
    GAMMA1, GAMMA2, GAMMA3, GAMMA4, GAMMA_X, I2, SIGMA1, SIGMA2, big_gamma, vertical,
)

SEC_PHI_SEC_PSI = mono(a=-1, c=-1)
CSC_PHI_SEC_PSI = mono(b=-1, c=-1)
SEC_PSI = mono(c=-1)
TAN_PSI = mono(c=-1, d=1)
TAN_PHI = mono(a=-1, b=1)
COT_PHI = mono(a=1, b=-1)

THETA1 = (1, 0, 0, 0)
THETA2 = (0, 1, 0, 0)
D_PHI = (0, 0, 1, 0)
D_PSI = (0, 0, 0, 1)
ORDER0 = (0, 0, 0, 0)


def op_kron(left, right) -> MatrixDiffOp:
    """Kronecker product of an operator with a constant matrix (either side)."""
    if isinstance(left, np.ndarray) and isinstance(right, MatrixDiffOp):
        size = left.shape[0] * right.size
        terms = {a: kron(left, m) for a, m in right.terms.items()}
    elif isinstance(left, MatrixDiffOp) and isinstance(right, np.ndarray):
        size = left.size * right.shape[0]
        terms = {a: kron(m, right) for a, m in left.terms.items()}
    else:
        raise TypeError("op_kron needs one MatrixDiffOp and one constant matrix")
    return MatrixDiffOp(size, terms)


def scalar_op(terms: dict) -> MatrixDiffOp:
    """Size-1 operator from {multi-index: scalar function}."""
    return MatrixDiffOp(1, {k: (f, np.eye(1)) for k, f in terms.items()})


# ---------------------------------------------------------------------------
# two-component operators
# ---------------------------------------------------------------------------


def build_D_V_parts() -> tuple:
    """(D_V', D_V''): the theta1 and theta2 summands of the vertical operator."""
    d1 = MatrixDiffOp(2, {THETA1: (SEC_PHI_SEC_PSI * 1j, SIGMA1)})
    d2 = MatrixDiffOp(2, {THETA2: (CSC_PHI_SEC_PSI * 1j, SIGMA2)})
    return d1, d2


def build_D_V(drop_theta2: bool = False) -> MatrixDiffOp:
    """Vertical Dirac operator i σ¹ d_θ1 /(cosφ cosψ) + i σ² d_θ2 /(sinφ cosψ).

    ``drop_theta2`` removes the second summand (mutation control).
    """
    d1, d2 = build_D_V_parts()
    return d1 if drop_theta2 else d1 + d2


def build_D_Q(correction: bool = True) -> MatrixDiffOp:
    """Base Dirac operator i σ¹ d_φ / cosψ + i σ² (d_ψ - tanψ/2) on the quadrant.

    ``correction=False`` drops the -tanψ/2 term (mutation control).
    """
    terms = {
        D_PHI: (SEC_PSI * 1j, SIGMA1),
        D_PSI: (1j, SIGMA2),
    }
    if correction:
        terms[ORDER0] = (TAN_PSI * -0.5j, SIGMA2)
    return MatrixDiffOp(2, terms)


def build_connection(phi_shift: TrigLaurentFun = ZERO, psi_shift: TrigLaurentFun = ZERO) -> tuple:
    """(∇_φ, ∇_ψ) = (d_φ + k_φ/2, d_ψ + k_ψ/2) as size-1 operators.

    The optional shifts are added to the zeroth-order parts (mutation control).
    """
    k = sphere_mean_curvature()
    nabla_phi = scalar_op({D_PHI: ONE, ORDER0: k.k_phi * 0.5 + phi_shift})
    nabla_psi = scalar_op({D_PSI: ONE, ORDER0: k.k_psi * 0.5 + psi_shift})
    return nabla_phi, nabla_psi


def build_T_parts() -> tuple:
    """(T', T''): tanφ/cosψ σ¹ + tanψ σ²  and  cotφ/cosψ σ¹ - tanψ σ²."""
    t1 = MatrixFun.from_scalar(TAN_PHI * SEC_PSI, SIGMA1) + MatrixFun.from_scalar(TAN_PSI, SIGMA2)
    t2 = MatrixFun.from_scalar(COT_PHI * SEC_PSI, SIGMA1) - MatrixFun.from_scalar(TAN_PSI, SIGMA2)
    return t1, t2


def kappa_expression() -> TrigLaurentFun:
    """(tan²φ/cos²ψ + 2 tan²ψ + cot²φ/cos²ψ)/4."""
    return (TAN_PHI ** 2 * SEC_PSI ** 2 + TAN_PSI ** 2 * 2 + COT_PHI ** 2 * SEC_PSI ** 2) * 0.25


# ---------------------------------------------------------------------------
# four-component operators
# ---------------------------------------------------------------------------


def build_D_S4() -> MatrixDiffOp:
    """Round-sphere Dirac operator in toroidal coordinates, written out directly."""
    return MatrixDiffOp(4, {
        THETA1: (SEC_PHI_SEC_PSI * 1j, GAMMA1),
        THETA2: (CSC_PHI_SEC_PSI * 1j, GAMMA2),
        D_PHI: (SEC_PSI * 1j, GAMMA3),
        D_PSI: (1j, GAMMA4),
        ORDER0: MatrixFun.from_scalar((COT_PHI - TAN_PHI) * SEC_PSI * 0.5j, GAMMA3)
        + MatrixFun.from_scalar(TAN_PSI * -1.5j, GAMMA4),
    })


def vertical_lift(d_v: MatrixDiffOp) -> MatrixDiffOp:
    """D (x) 1 for a vertical operator D."""
    return op_kron(I2, d_v)


def connection_lift(base_op: MatrixDiffOp, nabla: tuple) -> MatrixDiffOp:
    """1 (x)_∇ B: every d_φ, d_ψ of the base operator B is replaced by ∇_φ, ∇_ψ."""
    if base_op.order > 1:
        raise ValueError("connection lift is defined for first-order base operators")
    result = MatrixDiffOp(4)
    for alpha, coef in base_op.terms.items():
        if alpha[0] or alpha[1]:
            raise ValueError("base operators must not differentiate along the fibers")
        c4 = kron(coef, I2)
        if alpha == ORDER0:
            result = result + MatrixDiffOp.multiplication(c4, 4)
            continue
        j = 0 if alpha == D_PHI else 1
        result = result + c4 @ op_kron(nabla[j], np.eye(4))
    return result


def tensor_sum_kron(d_v: MatrixDiffOp | None = None, d_q: MatrixDiffOp | None = None,
                    connection: tuple | None = None) -> MatrixDiffOp:
    """D_V (x) 1 + (γ_X (x) 1)(1 (x)_∇ D_Q), before the Γ rearrangement."""
    d_v = build_D_V() if d_v is None else d_v
    d_q = build_D_Q() if d_q is None else d_q
    connection = build_connection() if connection is None else connection
    return vertical_lift(d_v) + vertical(GAMMA_X) @ connection_lift(d_q, connection)


def lift_vertical(d_v: MatrixDiffOp | None = None) -> MatrixDiffOp:
    """Γ (D_V (x) 1) Γ."""
    d_v = build_D_V() if d_v is None else d_v
    return vertical_lift(d_v).conjugate_by(big_gamma())


def lift_horizontal(d_q: MatrixDiffOp | None = None, connection: tuple | None = None) -> MatrixDiffOp:
    """Γ (γ_X (x) 1)(1 (x)_∇ D_Q) Γ."""
    d_q = build_D_Q() if d_q is None else d_q
    connection = build_connection() if connection is None else connection
    return (vertical(GAMMA_X) @ connection_lift(d_q, connection)).conjugate_by(big_gamma())


def tensor_sum(d_v: MatrixDiffOp | None = None, d_q: MatrixDiffOp | None = None,
               connection: tuple | None = None) -> MatrixDiffOp:
    """Γ [D_V (x) 1 + (γ_X (x) 1)(1 (x)_∇ D_Q)] Γ, the factorized operator on C^4."""
    return tensor_sum_kron(d_v, d_q, connection).conjugate_by(big_gamma())


def grading_defect(op: MatrixDiffOp, grading: np.ndarray) -> float:
    """Largest coefficient of {grading, op}; zero for odd operators."""
    return (grading @ op + op @ grading).max_abs()


# ---------------------------------------------------------------------------
# general T^2-fibrations
# ---------------------------------------------------------------------------

def fibration_vertical(spec: FibrationSpec) -> MatrixDiffOp:
    r1, r2 = (r.reciprocal() for r in spec.fiber_lengths)
    return MatrixDiffOp(2, {THETA1: (r1 * 1j, SIGMA1), THETA2: (r2 * 1j, SIGMA2)})


def fibration_connection(spec: FibrationSpec, mean_curvature: bool = True) -> tuple:
    """∇_Z = Z_H + k(Z_H)/2 along the two base directions.

    ``mean_curvature=False`` drops the k/2 term (mutation control).
    """
    k = spec.mean_curvature()
    out = []
    for j, z in enumerate((D_PHI, D_PSI)):
        terms = {z: ONE, ORDER0: k[j] * 0.5 if mean_curvature else ZERO}
        lift = spec.horizontal_lift(j)
        for a, key in enumerate((THETA1, THETA2)):
            if not lift[a].is_zero():
                terms[key] = lift[a]
        out.append(scalar_op(terms))
    return tuple(out)


def fibration_base(spec: FibrationSpec, correction: bool = True) -> MatrixDiffOp:
    """Base Dirac operator for rho_u² du² + rho_v² dv² in the frame (d_u/rho_u, d_v/rho_v)."""
    pu, pv = spec.base_lengths
    iu, iv = pu.reciprocal(), pv.reciprocal()
    terms = {D_PHI: (iu * 1j, SIGMA1), D_PSI: (iv * 1j, SIGMA2)}
    if correction:
        terms[ORDER0] = MatrixFun.from_scalar(iu * pv.log_derivative("phi") * 0.5j, SIGMA1) + \
            MatrixFun.from_scalar(iv * pu.log_derivative("psi") * 0.5j, SIGMA2)
    return MatrixDiffOp(2, terms)


def fibration_tensor_sum(spec: FibrationSpec, mean_curvature: bool = True,
                         base_correction: bool = True) -> MatrixDiffOp:
    return tensor_sum(fibration_vertical(spec), fibration_base(spec, base_correction),
                      fibration_connection(spec, mean_curvature))


_FRAME_GAMMAS = (GAMMA1, GAMMA2, GAMMA3, GAMMA4)   # (f_1, f_2, e_u, e_v)


def spin_connection(spec: FibrationSpec) -> tuple:
    """ω_I = (1/4) Σ_{J,K} g(∇_{E_I} E_K, E_J) γ^J γ^K for the orthonormal frame."""
    G = levi_civita(spec)
    omegas = []
    for i in range(4):
        w = MatrixFun.zeros(4)
        for j in range(4):
            for k in range(4):
                if j != k and not G[i, k, j].is_zero():
                    w = w + MatrixFun.from_scalar(G[i, k, j] * 0.25, _FRAME_GAMMAS[j] @ _FRAME_GAMMAS[k])
        omegas.append(w)
    return tuple(omegas)


def frame_dirac(spec: FibrationSpec) -> MatrixDiffOp:
    """Total Dirac operator i Σ_I γ^I (E_I + ω_I) built from the frame and Koszul formula."""
    frame = spec.frame()
    omegas = spin_connection(spec)
    total = MatrixDiffOp(4)
    for vec, gam, om in zip(frame, _FRAME_GAMMAS, omegas):
        terms = {}
        for mu, comp in enumerate(vec):
            if not comp.is_zero():
                alpha = tuple(1 if m == mu else 0 for m in range(4))
                terms[alpha] = (comp * 1j, gam)
        terms[ORDER0] = (gam * 1j) @ om
        total = total + MatrixDiffOp(4, terms)
    return total


def clifford_curvature(spec: FibrationSpec) -> MatrixFun:
    """c(Ω) = Σ_{i<j, a} Ω(e_i, e_j, f_a) γ^i γ^j γ^a with the horizontal pair (e_u, e_v)."""
    omega = curvature_form(spec).orthonormal
    out = MatrixFun.zeros(4)
    h = (2, 3)
    for i, j in combinations(range(2), 2):
        for a in range(2):
            cube = _FRAME_GAMMAS[h[i]] @ _FRAME_GAMMAS[h[j]] @ _FRAME_GAMMAS[a]
            out = out + MatrixFun.from_scalar(omega[a], cube)
    return out
