"""Closed-form geometric data on the principal stratum of the round four-sphere.

Coordinates are (theta1, theta2, phi, psi) with phi in (0, pi/2) and psi in
(-pi/2, pi/2); the sphere sits in C^2 x R as

    a = exp(i theta1) cos(phi) cos(psi),  b = exp(i theta2) sin(phi) cos(psi),  x = sin(psi).

Also provides :class:`FibrationSpec`, a coefficient model of a T^2-fibration
over a two-dimensional base box, used to study the curvature obstruction.
The base coordinates (u, v) are carried by the ring variables (phi, psi).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from numbers import Number

import numpy as np

from .errors import UnsupportedSpec
from .symcalc import (
    COS_PHI, COS_PSI, ONE, SIN_PHI, SIN_PSI, ZERO, TrigLaurentFun, check_weight, mono,
    pythagorean_normal_form,
)

W_X = mono(a=1, b=1, c=2)      # sin(phi) cos(phi) cos^2(psi)
W_B = mono(c=1)                # cos(psi)
W_S4 = mono(a=1, b=1, c=3)     # sin(phi) cos(phi) cos^3(psi)

BASE_VARS = ("phi", "psi")


@dataclass(frozen=True)
class SphereGeometry:
    """Diagonal round metric in toroidal coordinates and the three integration weights."""

    metric: tuple = (
        mono(a=2, c=2),   # g(d theta1, d theta1)
        mono(b=2, c=2),   # g(d theta2, d theta2)
        mono(c=2),        # g(d phi, d phi)
        ONE,              # g(d psi, d psi)
    )
    w_S4: TrigLaurentFun = W_S4
    w_B: TrigLaurentFun = W_B
    w_X: TrigLaurentFun = W_X

    def volume_density(self) -> TrigLaurentFun:
        """sqrt(det g), written as a monomial (the metric is diagonal with monomial entries)."""
        e = [0] * 6
        for g in self.metric:
            (exp, coeff), = g.terms.items()
            if any(x % 2 for x in exp) or coeff != 1:
                raise ValueError("metric entry is not a monomial square")
            e = [p + q // 2 for p, q in zip(e, exp)]
        return mono(*e)

    def vertical_metric(self) -> tuple:
        return self.metric[:2]

    def base_metric(self) -> tuple:
        return self.metric[2:]


@dataclass(frozen=True)
class SecondFundamentalForm:
    """Components S(d_theta_a, d_theta_a, Z) for Z in (d_phi, d_psi); index [a][z]."""

    components: tuple

    def __call__(self, a: int, z: int) -> TrigLaurentFun:
        return self.components[a][z]


@dataclass(frozen=True)
class MeanCurvature:
    k_phi: TrigLaurentFun
    k_psi: TrigLaurentFun

    def as_tuple(self) -> tuple:
        return (self.k_phi, self.k_psi)


def sphere_second_fundamental_form() -> SecondFundamentalForm:
    """The four nonvanishing components, as tabulated for the round sphere."""
    return SecondFundamentalForm((
        (mono(a=1, b=1, c=2, coeff=-1.0), mono(a=2, c=1, d=1, coeff=-1.0)),
        (mono(a=1, b=1, c=2), mono(b=2, c=1, d=1, coeff=-1.0)),
    ))


def second_fundamental_form_from_metric(g: SphereGeometry) -> SecondFundamentalForm:
    """S(d_theta_a, d_theta_a, Z) = Z(g_aa)/2 for a torus-invariant diagonal metric."""
    comps = tuple(
        tuple(g.metric[a].diff(z) * 0.5 for z in BASE_VARS) for a in range(2)
    )
    return SecondFundamentalForm(comps)


def sphere_mean_curvature() -> MeanCurvature:
    return MeanCurvature(mono(a=1, b=-1) - mono(a=-1, b=1), mono(c=-1, d=1, coeff=-2.0))


def mean_curvature_from_sff(S: SecondFundamentalForm, g: SphereGeometry) -> MeanCurvature:
    """Trace over the vertical directions: k(Z) = sum_a S(d_a, d_a, Z) / g_aa."""
    k = []
    for z in range(2):
        total = ZERO
        for a in range(2):
            total = total + S(a, z) * g.metric[a].reciprocal()
        k.append(total)
    return MeanCurvature(*k)


@dataclass(frozen=True)
class SphereGenerator:
    name: str
    mode: tuple
    fun: TrigLaurentFun

    @property
    def radial(self) -> TrigLaurentFun:
        return self.fun.drop_phase()


def sphere_generators() -> dict:
    """The coordinate functions a, b, x with their spectral modes."""
    return {
        "a": SphereGenerator("a", (1, 0), mono(n1=1, a=1, c=1)),
        "b": SphereGenerator("b", (0, 1), mono(n2=1, b=1, c=1)),
        "x": SphereGenerator("x", (0, 0), mono(d=1)),
    }


def sphere_relation_residual() -> float:
    """Largest coefficient of |a|^2 + |b|^2 + x^2 - 1 after Pythagorean reduction."""
    gens = sphere_generators()
    a, b, x = gens["a"].fun, gens["b"].fun, gens["x"].fun
    expr = a.conj() * a + b.conj() * b + x * x - ONE
    return pythagorean_normal_form(expr)[0].max_abs()


# ---------------------------------------------------------------------------
# T^2-fibrations over a 2D base box
# ---------------------------------------------------------------------------


def _as_fun(f) -> TrigLaurentFun:
    return TrigLaurentFun.constant(f) if isinstance(f, Number) else f


def _positive_monomial(f, what: str) -> TrigLaurentFun:
    f = _as_fun(f)
    try:
        return check_weight(f)
    except ValueError:
        raise UnsupportedSpec(f"{what} must be a single positive theta-independent monomial") from None


@dataclass(frozen=True)
class FibrationSpec:
    """Coefficient data of a torus fibration over the (u, v) = (phi, psi) box.

    The metric is  sum_a r_a^2 (d theta_a + A^a_u du + A^a_v dv)^2 + rho_u^2 du^2 + rho_v^2 dv^2,
    so horizontal lifts are  d_u - A^a_u d_theta_a  and  d_v - A^a_v d_theta_a.

    Parameters
    ----------
    fiber_lengths : (r_1, r_2), positive monomials.
    base_lengths : (rho_u, rho_v), positive monomials.
    connection : 2 x 2 nested tuple, ``connection[a][j]`` = A^{a+1} along base direction j.
    """

    fiber_lengths: tuple
    base_lengths: tuple
    connection: tuple = ((ZERO, ZERO), (ZERO, ZERO))
    name: str = "fibration"

    def __post_init__(self):
        if len(self.fiber_lengths) != 2:
            raise UnsupportedSpec(f"fiber rank {len(self.fiber_lengths)} != 2")
        if len(self.base_lengths) != 2:
            raise UnsupportedSpec(f"base dimension {len(self.base_lengths)} != 2")
        if len(self.connection) != 2 or any(len(row) != 2 for row in self.connection):
            raise UnsupportedSpec("connection must have 2 x 2 components")
        r = tuple(_positive_monomial(x, "fiber length") for x in self.fiber_lengths)
        rho = tuple(_positive_monomial(x, "base length") for x in self.base_lengths)
        conn = tuple(tuple(_as_fun(c) for c in row) for row in self.connection)
        for row in conn:
            for c in row:
                if not c.is_theta_independent():
                    raise UnsupportedSpec("connection coefficients must be torus invariant")
        object.__setattr__(self, "fiber_lengths", r)
        object.__setattr__(self, "base_lengths", rho)
        object.__setattr__(self, "connection", conn)

    def vertical_metric(self) -> tuple:
        return tuple(r * r for r in self.fiber_lengths)

    def base_metric(self) -> tuple:
        return tuple(r * r for r in self.base_lengths)

    def mean_curvature(self) -> tuple:
        """k(Z_H) = Z log(r_1 r_2) for Z = d_u, d_v (torus-invariant lengths)."""
        vol = self.fiber_lengths[0] * self.fiber_lengths[1]
        return tuple(vol.log_derivative(z) for z in BASE_VARS)

    def horizontal_lift(self, j: int) -> tuple:
        """Coordinate components (theta1, theta2, phi, psi) of the lift of d_u (j=0) or d_v (j=1)."""
        comps = [-self.connection[0][j], -self.connection[1][j], ZERO, ZERO]
        comps[2 + j] = ONE
        return tuple(comps)

    def frame(self) -> tuple:
        """Orthonormal frame (f_1, f_2, e_u, e_v) as coordinate component tuples."""
        r1, r2 = (r.reciprocal() for r in self.fiber_lengths)
        f1 = (r1, ZERO, ZERO, ZERO)
        f2 = (ZERO, r2, ZERO, ZERO)
        es = []
        for j in range(2):
            inv = self.base_lengths[j].reciprocal()
            es.append(tuple(c * inv for c in self.horizontal_lift(j)))
        return (f1, f2, es[0], es[1])

    def coframe(self) -> tuple:
        """Dual coframe (f^1, f^2, e^u, e^v) as coordinate component tuples."""
        (r1, r2), (pu, pv) = self.fiber_lengths, self.base_lengths
        A = self.connection
        return (
            (r1, ZERO, r1 * A[0][0], r1 * A[0][1]),
            (ZERO, r2, r2 * A[1][0], r2 * A[1][1]),
            (ZERO, ZERO, pu, ZERO),
            (ZERO, ZERO, ZERO, pv),
        )

    def is_closed(self) -> bool:
        """dA = 0 componentwise."""
        return all(
            pythagorean_normal_form(A[1].diff("phi") - A[0].diff("psi"))[0].is_zero()
            for A in self.connection
        )


def sphere_fibration() -> FibrationSpec:
    """The round-sphere stratum seen as a flat T^2-fibration over the quadrant."""
    return FibrationSpec(
        fiber_lengths=(COS_PHI * COS_PSI, SIN_PHI * COS_PSI),
        base_lengths=(COS_PSI, ONE),
        name="sphere",
    )


def twisted_fibration(a_u: TrigLaurentFun = SIN_PSI) -> FibrationSpec:
    """Flat lengths with connection A^1 = a_u du; curvature -d_v(a_u) != 0 for a_u = sin(psi)."""
    return FibrationSpec(
        fiber_lengths=(ONE, ONE),
        base_lengths=(ONE, ONE),
        connection=((a_u, ZERO), (ZERO, ZERO)),
        name="twisted",
    )


def exact_fibration(potential: TrigLaurentFun = SIN_PHI * SIN_PSI) -> FibrationSpec:
    """Connection A^1 = d(potential): closed, hence flat."""
    return FibrationSpec(
        fiber_lengths=(ONE, ONE),
        base_lengths=(ONE, ONE),
        connection=((potential.diff("phi"), potential.diff("psi")), (ZERO, ZERO)),
        name="exact",
    )


def bracket(X: tuple, Y: tuple) -> tuple:
    """Lie bracket of vector fields given by coordinate components."""
    return tuple(
        sum((X[m] * Y[mu].diff(m) - Y[m] * X[mu].diff(m) for m in range(4)), ZERO)
        for mu in range(4)
    )


def pair(form: tuple, vec: tuple) -> TrigLaurentFun:
    return sum((f * v for f, v in zip(form, vec)), ZERO)


def structure_constants(spec: FibrationSpec) -> np.ndarray:
    """c[I, J, K] with [E_I, E_J] = sum_K c[I, J, K] E_K in the orthonormal frame (object array)."""
    E, Th = spec.frame(), spec.coframe()
    c = np.empty((4, 4, 4), dtype=object)
    c.fill(ZERO)
    for i, j in combinations(range(4), 2):
        br = bracket(E[i], E[j])
        for k in range(4):
            val = pair(Th[k], br)
            c[i, j, k] = val
            c[j, i, k] = -val
    return c


def levi_civita(spec: FibrationSpec) -> np.ndarray:
    """G[I, J, K] = g(nabla_{E_I} E_J, E_K) by the Koszul formula."""
    c = structure_constants(spec)
    G = np.empty((4, 4, 4), dtype=object)
    for i in range(4):
        for j in range(4):
            for k in range(4):
                G[i, j, k] = (c[i, j, k] - c[j, k, i] + c[k, i, j]) * 0.5
    return G


@dataclass(frozen=True)
class CurvatureForm:
    """Omega(X, Y, Z) = <[X_H, Y_H], Z> for horizontal X, Y and vertical Z.

    ``coordinate[a]`` is the value on (lift of d_u, lift of d_v, d_theta_a).
    """

    coordinate: tuple
    orthonormal: tuple = field(default=())

    def __call__(self, X, Y, Z) -> TrigLaurentFun:
        """Evaluate on X = (x_u, x_v), Y = (y_u, y_v) (base components) and Z = (z_1, z_2)."""
        X = [_as_fun(x) for x in X]
        Y = [_as_fun(y) for y in Y]
        area = X[0] * Y[1] - X[1] * Y[0]
        return sum((area * _as_fun(z) * w for z, w in zip(Z, self.coordinate)), ZERO)

    def is_zero(self) -> bool:
        return all(pythagorean_normal_form(w)[0].is_zero() for w in self.coordinate)


def curvature_form(spec: FibrationSpec) -> CurvatureForm:
    """Curvature of the horizontal distribution, in coordinate and orthonormal frames."""
    lifts = [spec.horizontal_lift(0), spec.horizontal_lift(1)]
    br = bracket(lifts[0], lifts[1])
    h = spec.vertical_metric()
    coord = tuple(br[a] * h[a] for a in range(2))
    # orthonormal: Omega(e_u, e_v, f_a) = coordinate value / (rho_u rho_v r_a)
    scale = (spec.base_lengths[0] * spec.base_lengths[1]).reciprocal()
    ortho = tuple(coord[a] * scale * spec.fiber_lengths[a].reciprocal() for a in range(2))
    return CurvatureForm(coord, ortho)
