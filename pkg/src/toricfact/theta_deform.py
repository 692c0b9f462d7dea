"""θ-deformed functions on the sphere stratum and their mode-shift representation.

A deformed element  Σ_l f_l ⊗ U^l  acts on a mode-graded section ξ = Σ_k ξ_k by

    (π(x) ξ)_{k+l} += λ(l, k) f_l ξ_k,      U^l U^k = λ(l, k) U^{l+k},

which is the conjugation V* x V by the isometry ξ -> Σ ξ_k ⊗ U^k.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from numbers import Number

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from .errors import ModeOverflow
from .geometry import sphere_generators
from .nc_torus import DeformationMatrix
from .operators.numeric import GridSpec, ModeSet, assemble_numeric
from .symcalc import ZERO, MatrixDiffOp, TrigLaurentFun, half_density_form

TOL = 1e-12


def mode_decompose(f: TrigLaurentFun) -> dict:
    """Split f into spectral components f_k (each keeps its Fourier phase)."""
    return f.mode_decompose()


@dataclass(frozen=True)
class DeformedElement:
    """Finite sum Σ_k f_k ⊗ U^k with f_k in the spectral subspace k."""

    parts: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for k, f in self.parts.items():
            k = (int(k[0]), int(k[1]))
            if f.is_zero():
                continue
            if f.modes() != {k}:
                raise ValueError(f"component at mode {k} carries modes {sorted(f.modes())}")
            clean[k] = f
        object.__setattr__(self, "parts", clean)

    @classmethod
    def from_function(cls, f: TrigLaurentFun) -> "DeformedElement":
        return cls(mode_decompose(f))

    @classmethod
    def invariant(cls, f: TrigLaurentFun) -> "DeformedElement":
        """(f ∘ q) ⊗ 1 for a torus-invariant f."""
        if not f.is_theta_independent():
            raise ValueError("invariant elements need theta-independent functions")
        return cls({(0, 0): f})

    @property
    def modes(self) -> list:
        return sorted(self.parts)

    def degree(self) -> int:
        return max((max(abs(k[0]), abs(k[1])) for k in self.parts), default=0)

    def classical(self) -> TrigLaurentFun:
        """The undeformed function Σ_k f_k."""
        return sum(self.parts.values(), ZERO)

    def __add__(self, other):
        if not isinstance(other, DeformedElement):
            return NotImplemented
        out = dict(self.parts)
        for k, f in other.parts.items():
            out[k] = out[k] + f if k in out else f
        return DeformedElement(out)

    def __mul__(self, other):
        if isinstance(other, Number):
            return DeformedElement({k: f * other for k, f in self.parts.items()})
        return NotImplemented

    __rmul__ = __mul__


def _deformation(theta) -> DeformationMatrix:
    return theta if isinstance(theta, DeformationMatrix) else DeformationMatrix.two(float(theta))


def deformed_star(x: DeformedElement, theta) -> DeformedElement:
    """(f ⊗ U^l)* = conj(f) ⊗ λ(l, l) U^{-l}."""
    th = _deformation(theta)
    return DeformedElement({(-k[0], -k[1]): f.conj() * th.phase(k, k) for k, f in x.parts.items()})


def deformed_product(x: DeformedElement, y: DeformedElement, theta) -> DeformedElement:
    th = _deformation(theta)
    out = {}
    for l, f in x.parts.items():
        for m, g in y.parts.items():
            k = (l[0] + m[0], l[1] + m[1])
            term = f * g * th.phase(l, m)
            out[k] = out[k] + term if k in out else term
    return DeformedElement(out)


class DeformedRep:
    """The representation π on sections graded by a truncated mode set."""

    def __init__(self, theta12: float, modeset: ModeSet):
        if not np.isfinite(theta12):
            raise ValueError("theta must be finite")
        self.theta12 = float(theta12)
        self.theta = DeformationMatrix.two(self.theta12)
        self.modeset = modeset

    def phase(self, l, k) -> complex:
        return self.theta.phase(l, k)

    # -- exact action on ring-valued sections ------------------------------
    def apply(self, x: DeformedElement, xi: dict) -> dict:
        """π(x) ξ for ξ = {mode k: spinor tuple of TrigLaurentFun in spectral subspace k}.

        Raises :class:`ModeOverflow` if a nonzero output lands outside the mode set.
        """
        out = defaultdict(lambda: None)
        clipped = []
        for k, comps in xi.items():
            comps = (comps,) if isinstance(comps, TrigLaurentFun) else tuple(comps)
            for l, f in x.parts.items():
                target = (k[0] + l[0], k[1] + l[1])
                lam = self.phase(l, k)
                prod = tuple(f * c * lam for c in comps)
                if all(p.is_zero() for p in prod):
                    continue
                if target not in self.modeset:
                    clipped.append(target)
                    continue
                prev = out[target]
                out[target] = prod if prev is None else tuple(a + b for a, b in zip(prev, prod))
        if clipped:
            raise ModeOverflow(clipped)
        return {k: v for k, v in out.items() if v is not None}

    # -- numeric matrices --------------------------------------------------
    def matrix(self, x: DeformedElement, grid: GridSpec, size: int = 1) -> sp.csr_matrix:
        """π(x) on (mode, node, component) unknowns; outputs beyond the truncation are dropped."""
        P, S = grid.mesh()
        nn = grid.n_nodes
        dim = len(self.modeset) * nn * size
        rows, cols, vals = [], [], []
        base_idx = np.arange(nn * size)
        for l, f in x.parts.items():
            radial = np.repeat(f.drop_phase().evaluate(P, S), size)
            for k in self.modeset:
                target = (k[0] + l[0], k[1] + l[1])
                if target not in self.modeset:
                    continue
                i0 = self.modeset.index(target) * nn * size
                j0 = self.modeset.index(k) * nn * size
                rows.append(i0 + base_idx)
                cols.append(j0 + base_idx)
                vals.append(self.phase(l, k) * radial)
        if not rows:
            return sp.csr_matrix((dim, dim), dtype=complex)
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
        )

    def interior_columns(self, grid: GridSpec, size: int, margin: int) -> np.ndarray:
        """Unknowns whose mode satisfies |k|_inf <= N - margin."""
        nn = grid.n_nodes * size
        idx = [
            self.modeset.index(k) * nn + np.arange(nn)
            for k in self.modeset
            if max(abs(k[0]), abs(k[1])) <= self.modeset.N - margin
        ]
        return np.concatenate(idx) if idx else np.zeros(0, dtype=int)


def sphere_elements() -> dict:
    """The generators a, b, x as deformed elements."""
    return {name: DeformedElement({g.mode: g.fun}) for name, g in sphere_generators().items()}


@dataclass
class RelationResult:
    theta12: float
    sphere_relation: float
    star_compatibility: float
    commutation: float
    commutation_phase: complex
    x_central: float
    classical: float | None = None

    def as_checks(self) -> list:
        checks = [
            ("sphere_relation", self.sphere_relation),
            ("star_compatibility", self.star_compatibility),
            ("ab_commutation_phase", self.commutation),
            ("x_central", self.x_central),
        ]
        if self.classical is not None:
            checks.append(("classical_multiplication", self.classical))
        return checks


def sphere_relations_check(theta12: float, modeset: ModeSet, grid: GridSpec | None = None) -> RelationResult:
    """Transport the sphere relations through π and measure residuals on interior modes."""
    grid = grid or GridSpec(6, 6)
    rep = DeformedRep(theta12, modeset)
    el = sphere_elements()
    A, B, X = (rep.matrix(el[n], grid) for n in ("a", "b", "x"))
    cols = rep.interior_columns(grid, 1, 1)
    dim = A.shape[0]
    eye = sp.identity(dim, format="csr", dtype=complex)

    def residual(M):
        sub = M[:, cols]
        return float(abs(sub).max()) if sub.nnz else 0.0

    rel = A.conj().T @ A + B.conj().T @ B + X @ X - eye
    star_a = rep.matrix(deformed_star(el["a"], theta12), grid)
    star_b = rep.matrix(deformed_star(el["b"], theta12), grid)
    star_res = max(residual(star_a - A.conj().T), residual(star_b - B.conj().T))
    # U_1 U_2 = exp(2πi θ_12) U_2 U_1 gives π(a)π(b) = exp(2πi θ_12) π(b)π(a) on interior modes
    ph = np.exp(2j * np.pi * theta12)
    comm = residual(A @ B - ph * (B @ A))
    central = max(residual(X @ A - A @ X), residual(X @ B - B @ X))
    classical = None
    if theta12 == 0:
        f = el["a"].classical().conj() * el["a"].classical() + el["b"].classical().conj() * el["b"].classical()
        f = f + el["x"].classical() * el["x"].classical()
        P, S = grid.mesh()
        m = rep.matrix(DeformedElement.invariant(f), grid)
        classical = max(residual(A.conj().T @ A + B.conj().T @ B + X @ X - m),
                        float(np.max(np.abs(f.evaluate(P, S) - 1))))
    return RelationResult(theta12, residual(rel), star_res, comm, ph, central, classical)


@dataclass
class CommutatorNorms:
    radii: list
    norms: list
    drift: list


def commutator_norm(op: MatrixDiffOp, x: DeformedElement, radii, grid: GridSpec,
                    weight: TrigLaurentFun | None = None, theta12: float = 0.0) -> CommutatorNorms:
    """‖[D, π(x)]‖ on interior modes for each truncation radius, in weighted L².

    With a weight, D is replaced by its half-density form w^{1/2} D w^{-1/2},
    which leaves commutators with multiplication operators unchanged and whose
    central-difference matrix is symmetric for the flat quadrature.
    """
    if weight is not None:
        op = half_density_form(op, weight)
    norms = []
    for N in radii:
        ms = ModeSet(N)
        D = assemble_numeric(op, grid, ms)
        rep = DeformedRep(theta12, ms)
        Pi = rep.matrix(x, grid, op.size)
        Dm = D.to_sparse()
        C = (Dm @ Pi - Pi @ Dm).tocsc()
        cols = rep.interior_columns(grid, op.size, x.degree())
        s = np.sqrt(np.tile(D.quadrature_weights(), len(ms)))
        C = sp.diags(s) @ C[:, cols] @ sp.diags(1 / s[cols])
        norms.append(_largest_singular_value(C))
    drift = [abs(b - a) / max(abs(a), 1e-300) for a, b in zip(norms, norms[1:])]
    return CommutatorNorms(list(radii), norms, drift)


def _largest_singular_value(C) -> float:
    if C.nnz == 0:
        return 0.0
    if min(C.shape) <= 600:
        return float(np.linalg.norm(C.toarray(), 2))
    val = sla.svds(C, k=1, return_singular_vectors=False, tol=1e-10, random_state=0)
    return float(val[0])


def clifford_gradient_norm(f: TrigLaurentFun, grid: GridSpec) -> float:
    """sup over nodes of (r |dθ| + |dr|) for f = exp(i n.θ) r, the norm of c(df) (one Fourier mode)."""
    from .geometry import SphereGeometry

    g = SphereGeometry().metric
    P, S = grid.mesh()
    (mode,) = f.modes()
    r = f.drop_phase()
    vert = sum(
        (abs(n) ** 2 * (r * r * g[j].reciprocal()).evaluate(P, S).real for j, n in enumerate(mode) if n),
        np.zeros_like(P),
    )
    horiz = (r.diff("phi") ** 2 * g[2].reciprocal() + r.diff("psi") ** 2 * g[3]).evaluate(P, S).real
    return float(np.max(np.sqrt(vert) + np.sqrt(horiz)))
