"""Closed-form generalized eigenvectors of the vertical operator and its resolvent."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ZeroSpectralParameter
from ..geometry import W_X
from ..symcalc import TrigLaurentFun, mono
from .symbolic import build_D_V


@dataclass(frozen=True)
class EigenFamily:
    """Ψ^± = exp(i n.θ) (1, ±c)^T / sqrt(2 w_X) and λ = |n_1/cosφ + i n_2/sinφ| / cosψ.

    The radial parts are returned without the Fourier phase; arrays broadcast
    over (phi, psi).
    """

    n1: int
    n2: int

    def z(self, phi, psi=None):
        phi = np.asarray(phi, float)
        return self.n1 / np.cos(phi) + 1j * self.n2 / np.sin(phi)

    def c(self, phi, psi=None):
        if self.n1 == 0 and self.n2 == 0:
            return np.ones_like(np.asarray(phi, float), dtype=complex)
        z = self.z(phi)
        return z / np.abs(z)

    def lam(self, phi, psi):
        return np.abs(self.z(phi)) / np.cos(np.asarray(psi, float))

    def lambda_squared(self) -> TrigLaurentFun:
        """λ² as a ring element."""
        return mono(a=-2, c=-2, coeff=self.n1 ** 2) + mono(b=-2, c=-2, coeff=self.n2 ** 2)

    def spinor(self, sign: int, phi, psi) -> np.ndarray:
        """Radial part of Ψ^sign, shape (..., 2)."""
        phi, psi = np.broadcast_arrays(np.asarray(phi, float), np.asarray(psi, float))
        scale = 1 / np.sqrt(2 * W_X.evaluate(phi, psi).real)
        return np.stack([scale + 0j, sign * self.c(phi) * scale], axis=-1)

    def unit_vector(self, sign: int, phi, psi) -> np.ndarray:
        """(1, ±c)/sqrt(2): the pointwise unit vector behind Ψ^±."""
        phi, psi = np.broadcast_arrays(np.asarray(phi, float), np.asarray(psi, float))
        c = self.c(phi)
        return np.stack([np.ones_like(c), sign * c], axis=-1) / np.sqrt(2)


def eigen_family(n1: int, n2: int) -> EigenFamily:
    return EigenFamily(int(n1), int(n2))


def vertical_symbol(n1: int, n2: int, phi, psi) -> np.ndarray:
    """The vertical operator on mode (n1, n2), evaluated pointwise: shape (..., 2, 2)."""
    op = build_D_V().substitute_modes(n1, n2)
    return op.zeroth_order().evaluate(phi, psi)


def resolvent_series(mu: float, n1: int, n2: int, phi, psi) -> np.ndarray:
    """K^+ + K^- on mode (n1, n2): Σ_± (iμ ∓ λ)^{-1} |v_±><v_±| pointwise, shape (..., 2, 2)."""
    if mu == 0:
        raise ZeroSpectralParameter("the resolvent series needs a nonzero real parameter")
    fam = eigen_family(n1, n2)
    lam = np.asarray(fam.lam(phi, psi))
    out = 0
    for sign in (1, -1):
        v = fam.unit_vector(sign, phi, psi)
        proj = v[..., :, None] * v[..., None, :].conj()
        out = out + proj / np.asarray(1j * mu - sign * lam)[..., None, None]
    return out
