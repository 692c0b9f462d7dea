"""Numeric realization of torus-equivariant operators on Fourier modes x quadrant grid.

Unknowns are ordered (mode, node, spinor component).  Operators whose
coefficients do not depend on theta are block diagonal over modes, so a
:class:`ModeGridOperator` stores one sparse block per mode.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product

import numpy as np
import scipy.sparse as sp

from ..errors import OrderOverflow, SingularCoefficient
from ..geometry import W_B, W_S4, W_X
from ..symcalc import MatrixDiffOp, TrigLaurentFun, check_weight

PHI_RANGE = (0.0, np.pi / 2)
PSI_RANGE = (-np.pi / 2, np.pi / 2)


def _uniform_axis(n: int, lo: float, hi: float):
    h = (hi - lo) / (n + 1)
    nodes = lo + h * np.arange(1, n + 1)
    d = sp.diags([-np.ones(n - 1), np.ones(n - 1)], [-1, 1], shape=(n, n)) / (2 * h)
    weights = np.full(n, h)
    return nodes, d.tocsr(), weights


def _chebyshev_axis(n: int, lo: float, hi: float):
    """First-kind Chebyshev nodes, barycentric differentiation, Fejér weights."""
    k = np.arange(1, n + 1)
    t = (2 * k - 1) * np.pi / (2 * n)
    x = np.cos(t)[::-1]
    t = t[::-1]
    bary = (-1.0) ** k * np.sin((2 * k - 1) * np.pi / (2 * n))
    bary = bary[::-1]
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    d = (bary[None, :] / bary[:, None]) / diff
    np.fill_diagonal(d, 0.0)
    np.fill_diagonal(d, -d.sum(axis=1))
    j = np.arange(1, n // 2 + 1)
    w = (2.0 / n) * (1 - 2 * np.sum(np.cos(2 * np.outer(t, j)) / (4 * j ** 2 - 1), axis=1))
    half = (hi - lo) / 2
    nodes = lo + half * (x + 1)
    return nodes, sp.csr_matrix(d / half), w * half


@dataclass(frozen=True)
class GridSpec:
    """Interior tensor grid on the open quadrant (0, π/2) x (-π/2, π/2).

    ``rule`` is ``"uniform"`` (central differences, zero padding at the edges)
    or ``"chebyshev"`` (collocation on first-kind Chebyshev nodes).
    """

    n_phi: int
    n_psi: int | None = None
    rule: str = "uniform"

    def __post_init__(self):
        if self.n_psi is None:
            object.__setattr__(self, "n_psi", self.n_phi)
        if self.n_phi < 4 or self.n_psi < 4:
            raise ValueError("grids need at least 4 interior nodes per axis")
        if self.rule not in ("uniform", "chebyshev"):
            raise ValueError(f"unknown node rule {self.rule!r}")

    @cached_property
    def _axes(self):
        build = _uniform_axis if self.rule == "uniform" else _chebyshev_axis
        return build(self.n_phi, *PHI_RANGE), build(self.n_psi, *PSI_RANGE)

    @property
    def phi(self) -> np.ndarray:
        return self._axes[0][0]

    @property
    def psi(self) -> np.ndarray:
        return self._axes[1][0]

    @property
    def n_nodes(self) -> int:
        return self.n_phi * self.n_psi

    @property
    def h(self) -> tuple:
        return (PHI_RANGE[1] - PHI_RANGE[0]) / (self.n_phi + 1), (PSI_RANGE[1] - PSI_RANGE[0]) / (self.n_psi + 1)

    def mesh(self) -> tuple:
        """Flattened (phi, psi) node coordinates, phi index outer."""
        P, S = np.meshgrid(self.phi, self.psi, indexing="ij")
        return P.ravel(), S.ravel()

    def quadrature(self) -> np.ndarray:
        """Flattened tensor quadrature weights for d phi d psi."""
        return np.outer(self._axes[0][2], self._axes[1][2]).ravel()

    def derivative(self, var: str) -> sp.csr_matrix:
        dphi, dpsi = self._axes[0][1], self._axes[1][1]
        if var == "phi":
            return sp.kron(dphi, sp.identity(self.n_psi), format="csr")
        if var == "psi":
            return sp.kron(sp.identity(self.n_phi), dpsi, format="csr")
        raise ValueError(f"no stencil for {var!r}")

    def node_index(self, i: int, j: int) -> int:
        return i * self.n_psi + j


@dataclass(frozen=True)
class ModeSet:
    """Fourier modes k in Z^2 with |k|_inf <= N (optionally shifted by a constant offset)."""

    N: int
    offset: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.N < 0:
            raise ValueError("mode radius must be nonnegative")

    @property
    def modes(self) -> list:
        r = range(-self.N, self.N + 1)
        return [(k1, k2) for k1, k2 in product(r, r)]

    def __iter__(self):
        return iter(self.modes)

    def __len__(self):
        return (2 * self.N + 1) ** 2

    def __contains__(self, k):
        return max(abs(k[0]), abs(k[1])) <= self.N

    def index(self, k) -> int:
        return (k[0] + self.N) * (2 * self.N + 1) + (k[1] + self.N)

    def frequency(self, k) -> tuple:
        return (k[0] + self.offset[0], k[1] + self.offset[1])


def _block_diag(values: np.ndarray) -> sp.bsr_matrix:
    """Sparse block diagonal from an array of shape (P, s, s)."""
    P, s, _ = values.shape
    return sp.bsr_matrix((values, np.arange(P), np.arange(P + 1)), shape=(P * s, P * s))


def _check_finite(values: np.ndarray, what: str):
    if not np.all(np.isfinite(values)):
        raise SingularCoefficient(f"{what} is not finite at some grid node")


def assemble_mode(op: MatrixDiffOp, grid: GridSpec, frequency: tuple) -> sp.csr_matrix:
    """The block of ``op`` on one Fourier mode: d_theta_j -> i n_j, stencils for d_phi, d_psi."""
    if op.order > 1:
        raise OrderOverflow("numeric assembly substitutes stencils for first-order operators only")
    for m in op.terms.values():
        if not m.is_theta_independent():
            raise ValueError("coefficients depend on theta; the operator is not block diagonal over modes")
    s = op.size
    P, S = grid.mesh()
    n1, n2 = frequency
    total = sp.csr_matrix((grid.n_nodes * s, grid.n_nodes * s), dtype=complex)
    eye_s = sp.identity(s, format="csr")
    for (k1, k2, kp, ks), coef in op.terms.items():
        fac = (1j * n1) ** k1 * (1j * n2) ** k2
        if fac == 0:
            continue
        values = coef.evaluate(P, S) * fac
        _check_finite(values, "operator coefficient")
        mult = _block_diag(values)
        if kp:
            total = total + mult @ sp.kron(grid.derivative("phi"), eye_s)
        elif ks:
            total = total + mult @ sp.kron(grid.derivative("psi"), eye_s)
        else:
            total = total + mult
    return sp.csr_matrix(total)


@dataclass
class ModeGridOperator:
    """Per-mode sparse blocks of an equivariant operator, with its weight metadata."""

    grid: GridSpec
    modeset: ModeSet
    size: int
    blocks: dict
    weight: TrigLaurentFun | None = None
    label: str = ""

    @property
    def block_dim(self) -> int:
        return self.grid.n_nodes * self.size

    @property
    def shape(self) -> tuple:
        n = len(self.modeset) * self.block_dim
        return n, n

    def block(self, k) -> sp.csr_matrix:
        return self.blocks[tuple(k)]

    def to_sparse(self) -> sp.csr_matrix:
        return sp.block_diag([self.blocks[k] for k in self.modeset], format="csr")

    def apply(self, v: np.ndarray) -> np.ndarray:
        """Apply to an array of shape (modes, nodes * size)."""
        out = np.empty_like(v, dtype=complex)
        for i, k in enumerate(self.modeset):
            out[i] = self.blocks[k] @ v[i]
        return out

    def quadrature_weights(self) -> np.ndarray:
        """Per-unknown weights w(node) * quadrature for one mode block."""
        P, S = self.grid.mesh()
        w = self.grid.quadrature()
        if self.weight is not None:
            w = w * self.weight.evaluate(P, S).real
        return np.repeat(w, self.size)

    def symmetric_block(self, k) -> sp.csr_matrix:
        """S B S^{-1} with S = diag(sqrt(weights)): the block in orthonormal coordinates."""
        s = np.sqrt(self.quadrature_weights())
        return sp.diags(s) @ self.blocks[tuple(k)] @ sp.diags(1 / s)

    def symmetry_defect(self) -> float:
        """max over modes of |A - A^H|_max / |A|_max in orthonormal coordinates."""
        worst = 0.0
        for k in self.modeset:
            a = self.symmetric_block(k)
            scale = abs(a).max()
            if scale == 0:
                continue
            worst = max(worst, abs(a - a.conj().T).max() / scale)
        return float(worst)

    def __sub__(self, other: "ModeGridOperator") -> "ModeGridOperator":
        if other.grid != self.grid or other.modeset != self.modeset or other.size != self.size:
            raise ValueError("operators live on different discretizations")
        blocks = {k: self.blocks[k] - other.blocks[k] for k in self.modeset}
        return ModeGridOperator(self.grid, self.modeset, self.size, blocks, self.weight)

    def max_abs(self) -> float:
        return max((float(abs(b).max()) if b.nnz else 0.0 for b in self.blocks.values()), default=0.0)


def assemble_numeric(op: MatrixDiffOp, grid: GridSpec, modeset: ModeSet,
                     weight: TrigLaurentFun | None = None, label: str = "") -> ModeGridOperator:
    """Assemble every mode block of an equivariant first-order operator."""
    if weight is not None:
        check_weight(weight)
    blocks = {k: assemble_mode(op, grid, modeset.frequency(k)) for k in modeset}
    return ModeGridOperator(grid, modeset, op.size, blocks, weight, label)


@dataclass(frozen=True)
class WIdentification:
    """Index bijection (mode, node, s) x t -> (mode, node, c) with c = 2 t + s.

    ``s`` is the vertical spinor index, ``t`` the base spinor index.  The
    weights satisfy w_X(node) * w_B(node) = w_S4(node), so the identification
    is unitary between the weighted quadrature inner products.
    """

    grid: GridSpec
    modeset: ModeSet
    w_X: TrigLaurentFun
    w_B: TrigLaurentFun
    w_S4: TrigLaurentFun = field(default=None)

    def component(self, s: int, t: int) -> int:
        return 2 * t + s

    def index(self, k, node: int, s: int, t: int) -> int:
        return (self.modeset.index(k) * self.grid.n_nodes + node) * 4 + self.component(s, t)

    def apply(self, v: np.ndarray) -> np.ndarray:
        """(modes, nodes, s, t) -> (modes, nodes, 4)."""
        m, p = v.shape[:2]
        return np.transpose(v, (0, 1, 3, 2)).reshape(m, p, 4)

    def inverse(self, u: np.ndarray) -> np.ndarray:
        m, p = u.shape[:2]
        return np.transpose(u.reshape(m, p, 2, 2), (0, 1, 3, 2))

    def norm_tensor(self, v: np.ndarray) -> float:
        """Norm in the (w_X-module) (x) (w_B base spinors) quadrature."""
        P, S = self.grid.mesh()
        q = self.grid.quadrature() * self.w_X.evaluate(P, S).real * self.w_B.evaluate(P, S).real
        return float(np.sqrt(np.sum(q[None, :, None, None] * np.abs(v) ** 2)))

    def norm_total(self, u: np.ndarray) -> float:
        P, S = self.grid.mesh()
        w = self.w_S4 if self.w_S4 is not None else self.w_X * self.w_B
        q = self.grid.quadrature() * w.evaluate(P, S).real
        return float(np.sqrt(np.sum(q[None, :, None] * np.abs(u) ** 2)))


def W_unitary(grid: GridSpec, modeset: ModeSet) -> WIdentification:
    return WIdentification(grid, modeset, W_X, W_B, W_S4)
