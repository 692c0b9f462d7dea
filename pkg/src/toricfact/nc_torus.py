"""The noncommutative n-torus: twisted Laurent polynomials, trace, derivations, GNS.

Elements are finite sums  sum_k lambda_k U^k  with the ordered monomials
U^k = U_1^{k_1} ... U_n^{k_n}.  Moving generators past each other gives

    U^k U^l = exp(2 pi i k^T L l) U^{k+l},    L = strictly lower part of theta,

so that U_m U_l = exp(2 pi i theta_ml) U_l U_m.  The formula is not assumed by
the tests; they check the generator relation and associativity directly.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from itertools import product as cartesian
from numbers import Number

import numpy as np
import scipy.sparse as sp

from .errors import IndexOutOfRange, MismatchedDeformation

ZERO_TOL = 1e-13


@dataclass(frozen=True, eq=False)
class DeformationMatrix:
    """Real skew-symmetric n x n matrix theta."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("deformation matrix must be square")
        if not np.all(np.isfinite(m)):
            raise ValueError("deformation matrix must be finite")
        if not np.allclose(m, -m.T, atol=0, rtol=0):
            raise ValueError("deformation matrix must be skew-symmetric")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        lower = np.tril(m, -1)
        lower.setflags(write=False)
        object.__setattr__(self, "_lower", lower)

    @classmethod
    def two(cls, theta12: float) -> "DeformationMatrix":
        return cls(np.array([[0.0, theta12], [-theta12, 0.0]]))

    @classmethod
    def zero(cls, n: int) -> "DeformationMatrix":
        return cls(np.zeros((n, n)))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def phase(self, k, l) -> complex:
        """Scalar c with U^k U^l = c U^{k+l}."""
        return complex(np.exp(2j * np.pi * (np.asarray(k) @ self._lower @ np.asarray(l))))

    def __eq__(self, other):
        if not isinstance(other, DeformationMatrix):
            return NotImplemented
        return self.matrix.shape == other.matrix.shape and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash(self.matrix.tobytes())


def _as_deformation(theta) -> DeformationMatrix:
    if isinstance(theta, DeformationMatrix):
        return theta
    if isinstance(theta, Number):
        return DeformationMatrix.two(float(theta))
    return DeformationMatrix(np.asarray(theta))


@dataclass(frozen=True, eq=False)
class TorusPoly:
    """Finitely supported sum of normal-ordered monomials U^k."""

    theta: DeformationMatrix
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        theta = _as_deformation(self.theta)
        object.__setattr__(self, "theta", theta)
        clean = {}
        for k, v in self.coeffs.items():
            k = tuple(int(x) for x in k)
            if len(k) != theta.n:
                raise ValueError(f"mode {k} does not have {theta.n} entries")
            v = complex(v)
            if abs(v) >= ZERO_TOL:
                clean[k] = clean.get(k, 0) + v
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def monomial(cls, theta, k, coeff=1.0) -> "TorusPoly":
        return cls(theta, {tuple(k): coeff})

    @classmethod
    def generator(cls, theta, j: int) -> "TorusPoly":
        """U_j (1-based index)."""
        theta = _as_deformation(theta)
        if not 1 <= j <= theta.n:
            raise IndexOutOfRange(f"generator index {j} not in 1..{theta.n}")
        k = [0] * theta.n
        k[j - 1] = 1
        return cls(theta, {tuple(k): 1.0})

    @classmethod
    def scalar(cls, theta, value) -> "TorusPoly":
        theta = _as_deformation(theta)
        return cls(theta, {(0,) * theta.n: value})

    @property
    def n(self) -> int:
        return self.theta.n

    @property
    def support(self) -> list:
        return sorted(self.coeffs)

    def degree(self) -> int:
        """Largest |k|_inf in the support (0 for the zero element)."""
        return max((max(abs(x) for x in k) for k in self.coeffs), default=0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def _same(self, other):
        if self.theta != other.theta:
            raise MismatchedDeformation("operands carry different deformation matrices")

    def __add__(self, other):
        if not isinstance(other, TorusPoly):
            return NotImplemented
        self._same(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return TorusPoly(self.theta, out)

    def __neg__(self):
        return TorusPoly(self.theta, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        if not isinstance(other, TorusPoly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Number):
            return TorusPoly(self.theta, {k: v * other for k, v in self.coeffs.items()})
        if isinstance(other, TorusPoly):
            return product(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self * other
        return NotImplemented

    def max_abs(self) -> float:
        return max((abs(v) for v in self.coeffs.values()), default=0.0)

    def __repr__(self):
        return f"TorusPoly(n={self.n}, terms={len(self.coeffs)})"


def product(x: TorusPoly, y: TorusPoly) -> TorusPoly:
    x._same(y)
    out = defaultdict(complex)
    for k, a in x.coeffs.items():
        for l, b in y.coeffs.items():
            kl = tuple(i + j for i, j in zip(k, l))
            out[kl] += x.theta.phase(k, l) * a * b
    return TorusPoly(x.theta, out)


def star(x: TorusPoly) -> TorusPoly:
    out = {}
    for k, v in x.coeffs.items():
        out[tuple(-i for i in k)] = x.theta.phase(k, k) * v.conjugate()
    return TorusPoly(x.theta, out)


def trace(x: TorusPoly) -> complex:
    return x.coeffs.get((0,) * x.n, 0j)


def derivation(j: int, x: TorusPoly) -> TorusPoly:
    """delta_j: U^k -> k_j U^k (1-based j)."""
    if not 1 <= j <= x.n:
        raise IndexOutOfRange(f"derivation index {j} not in 1..{x.n}")
    return TorusPoly(x.theta, {k: k[j - 1] * v for k, v in x.coeffs.items()})


def gns_inner(x: TorusPoly, y: TorusPoly) -> complex:
    """<x, y> = tau(x* y)."""
    x._same(y)
    return trace(product(star(x), y))


class TruncatedGNSRep:
    """Left-regular representation on span{U^k : |k|_inf <= N}.

    Products landing outside the box are dropped, so the matrices are exact on
    columns whose image stays inside.
    """

    def __init__(self, theta, N: int):
        if N < 0:
            raise ValueError("truncation radius must be nonnegative")
        self.theta = _as_deformation(theta)
        self.N = int(N)
        rng = range(-self.N, self.N + 1)
        self.basis = list(cartesian(rng, repeat=self.theta.n))
        self.index = {k: i for i, k in enumerate(self.basis)}

    @property
    def dim(self) -> int:
        return len(self.basis)

    def matrix(self, x: TorusPoly) -> sp.csr_matrix:
        if x.theta != self.theta:
            raise MismatchedDeformation("element and representation use different deformations")
        rows, cols, vals = [], [], []
        for l, a in x.coeffs.items():
            for k, j in self.index.items():
                i = self.index.get(tuple(p + q for p, q in zip(l, k)))
                if i is not None:
                    rows.append(i)
                    cols.append(j)
                    vals.append(self.theta.phase(l, k) * a)
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.dim, self.dim), dtype=complex)

    def vector(self, x: TorusPoly) -> np.ndarray:
        v = np.zeros(self.dim, complex)
        for k, a in x.coeffs.items():
            if k not in self.index:
                raise IndexOutOfRange(f"mode {k} outside truncation radius {self.N}")
            v[self.index[k]] = a
        return v

    def interior(self, margin: int) -> np.ndarray:
        """Indices of basis vectors with |k|_inf <= N - margin."""
        r = self.N - margin
        return np.array([i for i, k in enumerate(self.basis) if max(abs(x) for x in k) <= r], dtype=int)


def operator_norm(x: TorusPoly, N: int) -> float:
    """Norm of pi_N(x) on the interior columns |k|_inf <= N - deg(x)."""
    if x.is_zero():
        return 0.0
    rep = TruncatedGNSRep(x.theta, N)
    cols = rep.interior(x.degree())
    if cols.size == 0:
        return 0.0
    block = rep.matrix(x)[:, cols].toarray()
    return float(np.linalg.norm(block, 2))


def seminorm(m, x: TorusPoly, N: int) -> float:
    """sum over multi-indices i <= m of ||delta^i x|| (truncated at radius N)."""
    m = tuple(int(v) for v in m)
    if len(m) != x.n:
        raise IndexOutOfRange(f"multi-index {m} does not have {x.n} entries")
    total = 0.0
    for i in cartesian(*(range(mj + 1) for mj in m)):
        y = x
        for j, count in enumerate(i):
            for _ in range(count):
                y = derivation(j + 1, y)
        total += operator_norm(y, N)
    return total
