"""Exact coefficient ring on the principal stratum and matrix differential operators.

A :class:`TrigLaurentFun` is a finite sum of monomials

    c * exp(i(n1*theta1 + n2*theta2)) * cos(phi)^a sin(phi)^b cos(psi)^c sin(psi)^d

with integer (possibly negative) exponents.  The ring carries no relations:
``cos^2 + sin^2`` is *not* collapsed, so the normal form is just the dictionary
of monomials with the near-zero coefficients removed.  Identities that need the
Pythagorean relation go through :func:`pythagorean_normal_form`.

A :class:`MatrixFun` is a matrix with entries in that ring (stored as
exponent -> coefficient matrix) and a :class:`MatrixDiffOp` is a differential
operator of order <= 2 in d/dtheta1, d/dtheta2, d/dphi, d/dpsi whose
coefficients are :class:`MatrixFun` values.
"""
from __future__ import annotations

from collections import defaultdict
from itertools import product
from math import comb
from numbers import Number
from typing import Iterable, Mapping

import numpy as np
from scipy.special import beta

from .errors import NonIntegrable, OrderOverflow

ZERO_TOL = 1e-13
MAX_ORDER = 2

VARS = ("theta1", "theta2", "phi", "psi")
_VAR_INDEX = {name: i for i, name in enumerate(VARS)}
_VAR_ALIASES = {"t1": 0, "t2": 1, "θ1": 0, "θ2": 1, "φ": 2, "ψ": 3}

Exponent = tuple  # (n1, n2, a, b, c, d)
MultiIndex = tuple  # (k_theta1, k_theta2, k_phi, k_psi)

_ZERO_EXP = (0, 0, 0, 0, 0, 0)


def var_index(var) -> int:
    if isinstance(var, int):
        if 0 <= var < 4:
            return var
        raise ValueError(f"variable index out of range: {var}")
    if var in _VAR_INDEX:
        return _VAR_INDEX[var]
    if var in _VAR_ALIASES:
        return _VAR_ALIASES[var]
    raise ValueError(f"unknown variable {var!r}; expected one of {VARS}")


def _unit(i: int) -> MultiIndex:
    e = [0, 0, 0, 0]
    e[i] = 1
    return tuple(e)


def _add_exp(e, f):
    return (e[0] + f[0], e[1] + f[1], e[2] + f[2], e[3] + f[3], e[4] + f[4], e[5] + f[5])


def _diff_exponents(e, i):
    """Derivative of one monomial: list of (new exponent, factor)."""
    n1, n2, a, b, c, d = e
    if i == 0:
        return [(e, 1j * n1)] if n1 else []
    if i == 1:
        return [(e, 1j * n2)] if n2 else []
    out = []
    if i == 2:
        if a:
            out.append(((n1, n2, a - 1, b + 1, c, d), -a))
        if b:
            out.append(((n1, n2, a + 1, b - 1, c, d), b))
    else:
        if c:
            out.append(((n1, n2, a, b, c - 1, d + 1), -c))
        if d:
            out.append(((n1, n2, a, b, c + 1, d - 1), d))
    return out


# ---------------------------------------------------------------------------
# scalar ring
# ---------------------------------------------------------------------------


class TrigLaurentFun:
    """Element of the trigonometric Laurent ring (immutable)."""

    __slots__ = ("_terms",)
    __array_ufunc__ = None

    def __init__(self, terms: Mapping | None = None):
        clean = {}
        if terms:
            for e, v in terms.items():
                if len(e) != 6:
                    raise ValueError(f"exponent tuple must have 6 entries, got {e!r}")
                v = complex(v)
                if abs(v) >= ZERO_TOL:
                    clean[tuple(int(x) for x in e)] = v
        self._terms = clean

    # -- constructors -----------------------------------------------------
    @classmethod
    def monomial(cls, n1=0, n2=0, a=0, b=0, c=0, d=0, coeff=1.0) -> "TrigLaurentFun":
        return cls({(n1, n2, a, b, c, d): coeff})

    @classmethod
    def constant(cls, value) -> "TrigLaurentFun":
        return cls({_ZERO_EXP: value})

    @classmethod
    def _raw(cls, terms: dict) -> "TrigLaurentFun":
        obj = cls.__new__(cls)
        obj._terms = {e: v for e, v in terms.items() if abs(v) >= ZERO_TOL}
        return obj

    # -- inspection -------------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def is_zero(self) -> bool:
        return not self._terms

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def max_abs(self) -> float:
        return max((abs(v) for v in self._terms.values()), default=0.0)

    def modes(self) -> set:
        return {(e[0], e[1]) for e in self._terms}

    def is_theta_independent(self) -> bool:
        return all(e[0] == 0 and e[1] == 0 for e in self._terms)

    def is_real(self) -> bool:
        """Real-valued as a function (theta-independent with real coefficients)."""
        return self.is_theta_independent() and all(abs(v.imag) < ZERO_TOL for v in self._terms.values())

    def mode_decompose(self) -> dict:
        groups = defaultdict(dict)
        for e, v in self._terms.items():
            groups[(e[0], e[1])][e] = v
        return {k: TrigLaurentFun._raw(t) for k, t in groups.items()}

    def drop_phase(self) -> "TrigLaurentFun":
        """Forget the Fourier phase of every monomial (radial part)."""
        out = defaultdict(complex)
        for e, v in self._terms.items():
            out[(0, 0) + e[2:]] += v
        return TrigLaurentFun._raw(out)

    # -- arithmetic -------------------------------------------------------
    @staticmethod
    def _coerce(other):
        if isinstance(other, TrigLaurentFun):
            return other
        if isinstance(other, Number):
            return TrigLaurentFun.constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self._terms)
        for e, v in other._terms.items():
            out[e] = out.get(e, 0) + v
        return TrigLaurentFun._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return TrigLaurentFun._raw({e: -v for e, v in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        if isinstance(other, Number):
            return TrigLaurentFun._raw({e: v * other for e, v in self._terms.items()})
        if not isinstance(other, TrigLaurentFun):
            return NotImplemented
        out = defaultdict(complex)
        for e, v in self._terms.items():
            for f, w in other._terms.items():
                out[_add_exp(e, f)] += v * w
        return TrigLaurentFun._raw(out)

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, Number):
            return self * (1.0 / other)
        if isinstance(other, TrigLaurentFun):
            return self * other.reciprocal()
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, Number):
            return self.reciprocal() * other
        return NotImplemented

    def reciprocal(self) -> "TrigLaurentFun":
        if not self.is_monomial():
            raise ValueError("only monomials are invertible in the ring")
        (e, v), = self._terms.items()
        return TrigLaurentFun._raw({tuple(-x for x in e): 1.0 / v})

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.reciprocal() ** (-n)
        result = TrigLaurentFun.constant(1.0)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def conj(self) -> "TrigLaurentFun":
        return TrigLaurentFun._raw(
            {(-e[0], -e[1]) + e[2:]: v.conjugate() for e, v in self._terms.items()}
        )

    def diff(self, var) -> "TrigLaurentFun":
        i = var_index(var)
        out = defaultdict(complex)
        for e, v in self._terms.items():
            for f, fac in _diff_exponents(e, i):
                out[f] += fac * v
        return TrigLaurentFun._raw(out)

    def log_derivative(self, var) -> "TrigLaurentFun":
        """d(self)/self for a monomial, which stays inside the ring."""
        if not self.is_monomial():
            raise ValueError("log-derivative is only closed in the ring for monomials")
        i = var_index(var)
        (e, _), = self._terms.items()
        n1, n2, a, b, c, d = e
        if i == 0:
            return TrigLaurentFun.constant(1j * n1)
        if i == 1:
            return TrigLaurentFun.constant(1j * n2)
        if i == 2:
            return TrigLaurentFun.monomial(a=-1, b=1, coeff=-a) + TrigLaurentFun.monomial(a=1, b=-1, coeff=b)
        return TrigLaurentFun.monomial(c=-1, d=1, coeff=-c) + TrigLaurentFun.monomial(c=1, d=-1, coeff=d)

    # -- numerics ---------------------------------------------------------
    def evaluate(self, phi, psi, theta1=0.0, theta2=0.0):
        phi, psi, theta1, theta2 = np.broadcast_arrays(
            np.asarray(phi, float), np.asarray(psi, float),
            np.asarray(theta1, float), np.asarray(theta2, float))
        cp, sp, cs, ss = np.cos(phi), np.sin(phi), np.cos(psi), np.sin(psi)
        out = np.zeros(phi.shape, complex)
        for (n1, n2, a, b, c, d), v in self._terms.items():
            term = v * cp ** float(a) * sp ** float(b) * cs ** float(c) * ss ** float(d)
            if n1 or n2:
                term = term * np.exp(1j * (n1 * theta1 + n2 * theta2))
            out += term
        return out

    def integrate_quadrant(self) -> complex:
        """Integral over T^2 x (0, pi/2) x (-pi/2, pi/2) against d theta d phi d psi."""
        total = 0j
        for (n1, n2, a, b, c, d), v in self._terms.items():
            if n1 or n2:
                continue
            if min(a, b, c, d) <= -1:
                raise NonIntegrable(f"monomial cos^{a} sin^{b} (phi) cos^{c} sin^{d} (psi)")
            if d % 2:
                continue
            phi_part = 0.5 * beta((a + 1) / 2, (b + 1) / 2)
            psi_part = beta((c + 1) / 2, (d + 1) / 2)
            total += v * phi_part * psi_part
        return (2 * np.pi) ** 2 * total

    def __repr__(self):
        if not self._terms:
            return "TrigLaurentFun(0)"
        parts = []
        for e, v in sorted(self._terms.items()):
            parts.append(f"({v:.6g})" + _mono_str(e))
        return "TrigLaurentFun(" + " + ".join(parts) + ")"


def _mono_str(e) -> str:
    n1, n2, a, b, c, d = e
    s = ""
    if n1 or n2:
        s += f"·e^i({n1}θ1+{n2}θ2)"
    for name, p in (("cosφ", a), ("sinφ", b), ("cosψ", c), ("sinψ", d)):
        if p:
            s += f"·{name}^{p}"
    return s


def mono(n1=0, n2=0, a=0, b=0, c=0, d=0, coeff=1.0) -> TrigLaurentFun:
    return TrigLaurentFun.monomial(n1, n2, a, b, c, d, coeff)


ONE = TrigLaurentFun.constant(1.0)
ZERO = TrigLaurentFun()
COS_PHI = mono(a=1)
SIN_PHI = mono(b=1)
COS_PSI = mono(c=1)
SIN_PSI = mono(d=1)
TAN_PHI = mono(a=-1, b=1)
COT_PHI = mono(a=1, b=-1)
TAN_PSI = mono(c=-1, d=1)
SEC_PSI = mono(c=-1)


def phase(n1: int, n2: int) -> TrigLaurentFun:
    return mono(n1=n1, n2=n2)


def multiply(f: TrigLaurentFun, g: TrigLaurentFun) -> TrigLaurentFun:
    return f * g


def differentiate(f: TrigLaurentFun, var) -> TrigLaurentFun:
    return f.diff(var)


def integrate_quadrant(f: TrigLaurentFun) -> complex:
    return f.integrate_quadrant()


def pythagorean_normal_form(f: TrigLaurentFun) -> tuple:
    """Canonical form of ``f`` modulo cos^2 + sin^2 = 1 in both angles.

    ``f`` is first multiplied by the smallest monomial cos^A sin^B (phi)
    cos^C sin^D (psi) clearing all negative exponents (a positive function on
    the open quadrant, so no information is lost), then every sin^2 is
    rewritten as 1 - cos^2.  The result lies in the span of cos^a sin^e with
    e in {0, 1}, which is a basis of the quotient ring, so ``f`` vanishes on the
    quadrant iff the returned function is zero.

    Returns ``(reduced, clearing_exponent)``.
    """
    if f.is_zero():
        return ZERO, _ZERO_EXP
    shift = [0, 0, 0, 0]
    for e in f.terms:
        for j in range(4):
            shift[j] = max(shift[j], -e[2 + j])
    clear = (0, 0) + tuple(shift)
    work = defaultdict(complex)
    for e, v in f.terms.items():
        work[_add_exp(e, clear)] += v
    done = defaultdict(complex)
    while work:
        e, v = work.popitem()
        n1, n2, a, b, c, d = e
        if b >= 2:
            work[(n1, n2, a, b - 2, c, d)] += v
            work[(n1, n2, a + 2, b - 2, c, d)] -= v
        elif d >= 2:
            work[(n1, n2, a, b, c, d - 2)] += v
            work[(n1, n2, a, b, c + 2, d - 2)] -= v
        else:
            done[e] += v
    return TrigLaurentFun(done), clear


def equal_on_quadrant(f: TrigLaurentFun, g: TrigLaurentFun) -> bool:
    reduced, _ = pythagorean_normal_form(f - g)
    return reduced.is_zero()


# ---------------------------------------------------------------------------
# matrix-valued functions
# ---------------------------------------------------------------------------


def _clean_matrix(m: np.ndarray) -> np.ndarray:
    m = np.array(m, dtype=complex)
    m[np.abs(m) < ZERO_TOL] = 0
    return m


class MatrixFun:
    """size x size matrix with entries in the trigonometric Laurent ring.

    Stored as a map monomial exponent -> constant coefficient matrix.  Use
    ``@`` for matrix products and ``*`` for scaling by a scalar or a
    :class:`TrigLaurentFun`.
    """

    __slots__ = ("size", "_terms")
    __array_ufunc__ = None

    def __init__(self, size: int, terms: Mapping | None = None):
        self.size = int(size)
        clean = {}
        for e, m in (terms or {}).items():
            m = _clean_matrix(m)
            if m.shape != (self.size, self.size):
                raise ValueError(f"coefficient shape {m.shape} != ({size}, {size})")
            if np.any(m):
                clean[tuple(e)] = m
        self._terms = clean

    @classmethod
    def _raw(cls, size, terms):
        obj = cls.__new__(cls)
        obj.size = size
        obj._terms = {}
        for e, m in terms.items():
            m[np.abs(m) < ZERO_TOL] = 0
            if np.any(m):
                obj._terms[e] = m
        return obj

    @classmethod
    def from_scalar(cls, f, matrix) -> "MatrixFun":
        matrix = np.asarray(matrix, complex)
        if isinstance(f, Number):
            f = TrigLaurentFun.constant(f)
        return cls._raw(matrix.shape[0], {e: v * matrix for e, v in f.terms.items()})

    @classmethod
    def identity(cls, size: int) -> "MatrixFun":
        return cls.from_scalar(ONE, np.eye(size))

    @classmethod
    def zeros(cls, size: int) -> "MatrixFun":
        return cls(size)

    @classmethod
    def from_entries(cls, entries) -> "MatrixFun":
        """Build from a nested list of TrigLaurentFun / numbers."""
        n = len(entries)
        out = defaultdict(lambda: np.zeros((n, n), complex))
        for i, row in enumerate(entries):
            for j, f in enumerate(row):
                if isinstance(f, Number):
                    f = TrigLaurentFun.constant(f)
                for e, v in f.terms.items():
                    out[e][i, j] += v
        return cls._raw(n, dict(out))

    @property
    def terms(self) -> dict:
        return {e: m.copy() for e, m in self._terms.items()}

    def entry(self, i: int, j: int) -> TrigLaurentFun:
        return TrigLaurentFun({e: m[i, j] for e, m in self._terms.items()})

    def is_zero(self) -> bool:
        return not self._terms

    def max_abs(self) -> float:
        return max((float(np.max(np.abs(m))) for m in self._terms.values()), default=0.0)

    def modes(self) -> set:
        return {(e[0], e[1]) for e in self._terms}

    def is_theta_independent(self) -> bool:
        return all(e[0] == 0 and e[1] == 0 for e in self._terms)

    def mode_decompose(self) -> dict:
        """Group by Fourier mode; each group is returned with its phase dropped."""
        groups = defaultdict(dict)
        for e, m in self._terms.items():
            key = (0, 0) + e[2:]
            g = groups[(e[0], e[1])]
            g[key] = g.get(key, 0) + m
        return {k: MatrixFun._raw(self.size, t) for k, t in groups.items()}

    def _check(self, other):
        if other.size != self.size:
            raise ValueError(f"size mismatch: {self.size} vs {other.size}")

    def __add__(self, other):
        if not isinstance(other, MatrixFun):
            return NotImplemented
        self._check(other)
        out = {e: m.copy() for e, m in self._terms.items()}
        for e, m in other._terms.items():
            out[e] = out[e] + m if e in out else m.copy()
        return MatrixFun._raw(self.size, out)

    def __neg__(self):
        return MatrixFun._raw(self.size, {e: -m for e, m in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, MatrixFun):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Number):
            return MatrixFun._raw(self.size, {e: m * other for e, m in self._terms.items()})
        if isinstance(other, TrigLaurentFun):
            out = defaultdict(lambda: np.zeros((self.size, self.size), complex))
            for e, m in self._terms.items():
                for f, v in other.terms.items():
                    out[_add_exp(e, f)] += v * m
            return MatrixFun._raw(self.size, dict(out))
        return NotImplemented

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, np.ndarray):
            return MatrixFun._raw(self.size, {e: m @ other for e, m in self._terms.items()})
        if not isinstance(other, MatrixFun):
            return NotImplemented
        self._check(other)
        out = defaultdict(lambda: np.zeros((self.size, self.size), complex))
        for e, m in self._terms.items():
            for f, n in other._terms.items():
                out[_add_exp(e, f)] += m @ n
        return MatrixFun._raw(self.size, dict(out))

    def __rmatmul__(self, other):
        if isinstance(other, np.ndarray):
            return MatrixFun._raw(self.size, {e: other @ m for e, m in self._terms.items()})
        return NotImplemented

    def adjoint(self) -> "MatrixFun":
        """Pointwise conjugate transpose."""
        return MatrixFun._raw(
            self.size, {(-e[0], -e[1]) + e[2:]: m.conj().T.copy() for e, m in self._terms.items()}
        )

    def diff(self, var) -> "MatrixFun":
        i = var_index(var)
        out = defaultdict(lambda: np.zeros((self.size, self.size), complex))
        for e, m in self._terms.items():
            for f, fac in _diff_exponents(e, i):
                out[f] += fac * m
        return MatrixFun._raw(self.size, dict(out))

    def evaluate(self, phi, psi, theta1=0.0, theta2=0.0) -> np.ndarray:
        """Values at points; shape ``broadcast(phi, psi).shape + (size, size)``."""
        phi, psi, theta1, theta2 = np.broadcast_arrays(
            np.asarray(phi, float), np.asarray(psi, float),
            np.asarray(theta1, float), np.asarray(theta2, float))
        cp, sp, cs, ss = np.cos(phi), np.sin(phi), np.cos(psi), np.sin(psi)
        out = np.zeros(phi.shape + (self.size, self.size), complex)
        for (n1, n2, a, b, c, d), m in self._terms.items():
            val = cp ** float(a) * sp ** float(b) * cs ** float(c) * ss ** float(d)
            if n1 or n2:
                val = val * np.exp(1j * (n1 * theta1 + n2 * theta2))
            out += val[..., None, None] * m
        return out

    def __eq__(self, other):
        if not isinstance(other, MatrixFun):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def __repr__(self):
        return f"MatrixFun(size={self.size}, terms={len(self._terms)})"


def kron(a, b) -> MatrixFun:
    """Kronecker product where either factor may be a constant matrix."""
    if isinstance(a, np.ndarray) and isinstance(b, MatrixFun):
        return MatrixFun._raw(a.shape[0] * b.size, {e: np.kron(a, m) for e, m in b.terms.items()})
    if isinstance(a, MatrixFun) and isinstance(b, np.ndarray):
        return MatrixFun._raw(a.size * b.shape[0], {e: np.kron(m, b) for e, m in a.terms.items()})
    if isinstance(a, MatrixFun) and isinstance(b, MatrixFun):
        out = defaultdict(lambda: np.zeros((a.size * b.size,) * 2, complex))
        for e, m in a.terms.items():
            for f, n in b.terms.items():
                out[_add_exp(e, f)] += np.kron(m, n)
        return MatrixFun._raw(a.size * b.size, dict(out))
    return MatrixFun.from_scalar(ONE, np.kron(a, b))


# ---------------------------------------------------------------------------
# differential operators
# ---------------------------------------------------------------------------


def _order(alpha) -> int:
    return sum(alpha)


def _as_matfun(coef, size) -> MatrixFun:
    if isinstance(coef, MatrixFun):
        return coef
    if isinstance(coef, TrigLaurentFun) or isinstance(coef, Number):
        return MatrixFun.from_scalar(coef, np.eye(size))
    if isinstance(coef, np.ndarray):
        return MatrixFun.from_scalar(ONE, coef)
    if isinstance(coef, tuple) and len(coef) == 2:
        return MatrixFun.from_scalar(coef[0], coef[1])
    raise TypeError(f"cannot interpret {type(coef).__name__} as a coefficient")


def _multi_index(key) -> MultiIndex:
    if isinstance(key, str):
        key = (key,) if key else ()
    if isinstance(key, tuple) and len(key) == 4 and all(isinstance(x, int) for x in key):
        return key
    alpha = [0, 0, 0, 0]
    for v in key:
        alpha[var_index(v)] += 1
    return tuple(alpha)


class MatrixDiffOp:
    """Sum over multi-indices alpha of coefficient_alpha * d^alpha (order <= 2).

    ``terms`` maps a multi-index ``(k_theta1, k_theta2, k_phi, k_psi)`` (or a
    tuple of variable names such as ``("phi",)``) to a coefficient: a
    :class:`MatrixFun`, a constant matrix, a scalar function, or a pair
    ``(scalar function, constant matrix)``.
    """

    __slots__ = ("size", "_terms")
    __array_ufunc__ = None

    def __init__(self, size: int, terms: Mapping | None = None):
        self.size = int(size)
        acc = {}
        for key, coef in (terms or {}).items():
            alpha = _multi_index(key)
            if _order(alpha) > MAX_ORDER:
                raise OrderOverflow(f"order {_order(alpha)} exceeds cap {MAX_ORDER}")
            m = _as_matfun(coef, self.size)
            if m.size != self.size:
                raise ValueError(f"coefficient size {m.size} != operator size {self.size}")
            acc[alpha] = acc[alpha] + m if alpha in acc else m
        self._terms = {a: m for a, m in acc.items() if not m.is_zero()}

    # -- constructors -----------------------------------------------------
    @classmethod
    def partial(cls, var, size: int) -> "MatrixDiffOp":
        return cls(size, {_unit(var_index(var)): np.eye(size)})

    @classmethod
    def multiplication(cls, coef, size: int | None = None) -> "MatrixDiffOp":
        if size is None:
            size = coef.size if isinstance(coef, MatrixFun) else np.asarray(coef).shape[0]
        return cls(size, {(0, 0, 0, 0): coef})

    @classmethod
    def identity(cls, size: int) -> "MatrixDiffOp":
        return cls(size, {(0, 0, 0, 0): np.eye(size)})

    # -- inspection -------------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def coefficient(self, key) -> MatrixFun:
        return self._terms.get(_multi_index(key), MatrixFun.zeros(self.size))

    @property
    def order(self) -> int:
        return max((_order(a) for a in self._terms), default=0)

    def part(self, order: int) -> "MatrixDiffOp":
        return MatrixDiffOp(self.size, {a: m for a, m in self._terms.items() if _order(a) == order})

    def zeroth_order(self) -> MatrixFun:
        return self._terms.get((0, 0, 0, 0), MatrixFun.zeros(self.size))

    def is_multiplication(self) -> bool:
        return all(_order(a) == 0 for a in self._terms)

    def max_abs(self) -> float:
        return max((m.max_abs() for m in self._terms.values()), default=0.0)

    def modes(self) -> set:
        out = set()
        for m in self._terms.values():
            out |= m.modes()
        return out

    # -- arithmetic -------------------------------------------------------
    def _check(self, other):
        if other.size != self.size:
            raise ValueError(f"size mismatch: {self.size} vs {other.size}")

    def __add__(self, other):
        if not isinstance(other, MatrixDiffOp):
            return NotImplemented
        self._check(other)
        out = dict(self._terms)
        for a, m in other._terms.items():
            out[a] = out[a] + m if a in out else m
        return MatrixDiffOp(self.size, out)

    def __neg__(self):
        return MatrixDiffOp(self.size, {a: -m for a, m in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, MatrixDiffOp):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        """Left multiplication of every coefficient by a scalar or scalar function."""
        if isinstance(other, (Number, TrigLaurentFun)):
            return MatrixDiffOp(self.size, {a: m * other for a, m in self._terms.items()})
        return NotImplemented

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, MatrixDiffOp):
            return compose(self, other)
        if isinstance(other, (np.ndarray, MatrixFun)):
            return compose(self, MatrixDiffOp.multiplication(other, self.size))
        return NotImplemented

    def __rmatmul__(self, other):
        if isinstance(other, (np.ndarray, MatrixFun)):
            return compose(MatrixDiffOp.multiplication(other, self.size), self)
        return NotImplemented

    def conjugate_by(self, u: np.ndarray) -> "MatrixDiffOp":
        """u P u^{-1} for a constant invertible matrix u."""
        uinv = np.linalg.inv(u)
        return MatrixDiffOp(self.size, {a: u @ m @ uinv for a, m in self._terms.items()})

    def substitute_modes(self, n1: int, n2: int) -> "MatrixDiffOp":
        """Replace d/dtheta_j by i*n_j (action on exp(i n.theta) * u(phi, psi))."""
        out = {}
        for (k1, k2, kp, ks), m in self._terms.items():
            fac = (1j * n1) ** k1 * (1j * n2) ** k2
            if fac == 0:
                continue
            key = (0, 0, kp, ks)
            out[key] = out[key] + m * fac if key in out else m * fac
        return MatrixDiffOp(self.size, out)

    def apply(self, section: Iterable) -> list:
        """Apply to a column vector of ring elements."""
        section = [s if isinstance(s, TrigLaurentFun) else TrigLaurentFun.constant(s) for s in section]
        if len(section) != self.size:
            raise ValueError(f"section has {len(section)} components, operator size {self.size}")
        result = [ZERO] * self.size
        for alpha, m in self._terms.items():
            derived = [_apply_derivative(s, alpha) for s in section]
            for i, j in product(range(self.size), repeat=2):
                cij = m.entry(i, j)
                if not cij.is_zero() and not derived[j].is_zero():
                    result[i] = result[i] + cij * derived[j]
        return result

    def __eq__(self, other):
        if not isinstance(other, MatrixDiffOp):
            return NotImplemented
        return is_zero(self - other)[0]

    __hash__ = None

    def __repr__(self):
        keys = ", ".join(_alpha_str(a) for a in sorted(self._terms))
        return f"MatrixDiffOp(size={self.size}, order={self.order}, terms=[{keys}])"


def _alpha_str(alpha) -> str:
    names = ("∂θ1", "∂θ2", "∂φ", "∂ψ")
    s = "".join(names[i] * k for i, k in enumerate(alpha))
    return s or "1"


def _apply_derivative(f: TrigLaurentFun, alpha) -> TrigLaurentFun:
    for i, k in enumerate(alpha):
        for _ in range(k):
            f = f.diff(i)
    return f


def _matfun_derivative(m: MatrixFun, gamma) -> MatrixFun:
    for i, k in enumerate(gamma):
        for _ in range(k):
            m = m.diff(i)
    return m


def compose(p: MatrixDiffOp, q: MatrixDiffOp) -> MatrixDiffOp:
    """The operator product p∘q with Leibniz cross terms."""
    if p.size != q.size:
        raise ValueError(f"size mismatch: {p.size} vs {q.size}")
    if p.order + q.order > MAX_ORDER:
        raise OrderOverflow(f"composition of orders {p.order} + {q.order} exceeds {MAX_ORDER}")
    out = {}
    for alpha, a in p.terms.items():
        for beta_, b in q.terms.items():
            # d^alpha (b d^beta) = sum_{g <= alpha} C(alpha, g) (d^g b) d^{alpha - g + beta}
            for g in product(*(range(k + 1) for k in alpha)):
                mult = 1
                for ak, gk in zip(alpha, g):
                    mult *= comb(ak, gk)
                db = _matfun_derivative(b, g)
                if db.is_zero():
                    continue
                key = tuple(ak - gk + bk for ak, gk, bk in zip(alpha, g, beta_))
                term = (a @ db) * mult
                out[key] = out[key] + term if key in out else term
    return MatrixDiffOp(p.size, out)


def anticommutator(p: MatrixDiffOp, q: MatrixDiffOp) -> MatrixDiffOp:
    return compose(p, q) + compose(q, p)


def check_weight(w: TrigLaurentFun) -> TrigLaurentFun:
    """Validate an integration weight: theta-independent, real, one positive monomial."""
    if not w.is_monomial() or not w.is_real():
        raise ValueError("weights must be single real theta-independent monomials")
    (_, v), = w.terms.items()
    if v.real <= 0:
        raise ValueError("weight coefficient must be positive")
    return w


def formal_adjoint(p: MatrixDiffOp, w: TrigLaurentFun) -> MatrixDiffOp:
    """Formal adjoint of a first-order operator for the pairing  ∫ <xi, eta> w.

    For P = sum_mu A_mu d_mu + B one has
    P* = -sum_mu (A_mu^* d_mu + d_mu(A_mu^*) + A_mu^* d_mu(w)/w) + B^*.
    """
    check_weight(w)
    if p.order > 1:
        raise OrderOverflow("formal adjoint is implemented for order <= 1")
    out = {}

    def add(key, m):
        out[key] = out[key] + m if key in out else m

    for alpha, a in p.terms.items():
        a_star = a.adjoint()
        if _order(alpha) == 0:
            add(alpha, a_star)
            continue
        mu = alpha.index(1)
        add(alpha, -a_star)
        add((0, 0, 0, 0), -a_star.diff(mu))
        if mu >= 2:
            add((0, 0, 0, 0), -(a_star * w.log_derivative(mu)))
    return MatrixDiffOp(p.size, out)


def is_zero(p, pythagorean: bool = False) -> tuple:
    """(holds, residual) for p == 0, residual = largest surviving coefficient."""
    if isinstance(p, TrigLaurentFun):
        f = pythagorean_normal_form(p)[0] if pythagorean else p
        r = f.max_abs()
        return r <= ZERO_TOL, r
    if isinstance(p, MatrixFun):
        p = MatrixDiffOp.multiplication(p, p.size)
    residual = 0.0
    for m in p.terms.values():
        if pythagorean:
            for i, j in product(range(m.size), repeat=2):
                residual = max(residual, pythagorean_normal_form(m.entry(i, j))[0].max_abs())
        else:
            residual = max(residual, m.max_abs())
    return residual <= ZERO_TOL, residual


def half_density_form(p: MatrixDiffOp, w: TrigLaurentFun) -> MatrixDiffOp:
    """w^{1/2} P w^{-1/2}: the same operator acting on L² with the flat measure.

    Each first-order term A d_mu picks up -A (d_mu w)/(2w); for operators
    symmetric with respect to w the result is formally symmetric for d phi d psi.
    """
    check_weight(w)
    if p.order > 1:
        raise OrderOverflow("half-density form is implemented for order <= 1")
    extra = MatrixFun.zeros(p.size)
    for alpha, a in p.terms.items():
        if _order(alpha) == 1:
            mu = alpha.index(1)
            if mu >= 2:
                extra = extra - a * (w.log_derivative(mu) * 0.5)
    return p + MatrixDiffOp.multiplication(extra, p.size)
