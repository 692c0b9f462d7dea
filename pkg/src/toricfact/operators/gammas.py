"""Pauli and Dirac matrices in the fixed convention, plus the gradings and Γ."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)

GAMMA1 = np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, -1, 0]], dtype=complex)
GAMMA2 = np.array([[0, -1j, 0, 0], [1j, 0, 0, 0], [0, 0, 0, 1j], [0, 0, -1j, 0]], dtype=complex)
GAMMA3 = np.array([[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]], dtype=complex)
GAMMA4 = np.array([[0, 0, -1j, 0], [0, 0, 0, -1j], [1j, 0, 0, 0], [0, 1j, 0, 0]], dtype=complex)

GAMMA_X = SIGMA3.copy()          # grading of the vertical module
GAMMA_Q = SIGMA3.copy()          # grading of the base spinors
GAMMA = np.diag([1, -1, -1, 1]).astype(complex)   # total grading


def vertical(a: np.ndarray) -> np.ndarray:
    """Act on the vertical spinor factor of C^2 (x) C^2 -> C^4 (inner index)."""
    return np.kron(I2, a)


def base(b: np.ndarray) -> np.ndarray:
    """Act on the base spinor factor (outer index)."""
    return np.kron(b, I2)


def big_gamma(gamma_x: np.ndarray = GAMMA_X, gamma: np.ndarray = GAMMA) -> np.ndarray:
    """(γ_X ⊗ 1)(1 + γ)/2 + (1 - γ)/2."""
    return vertical(gamma_x) @ (I4 + gamma) / 2 + (I4 - gamma) / 2


@dataclass(frozen=True)
class GammaSet:
    sigma1: np.ndarray = SIGMA1
    sigma2: np.ndarray = SIGMA2
    gamma1: np.ndarray = GAMMA1
    gamma2: np.ndarray = GAMMA2
    gamma3: np.ndarray = GAMMA3
    gamma4: np.ndarray = GAMMA4
    gamma_X: np.ndarray = GAMMA_X
    gamma_Q: np.ndarray = GAMMA_Q
    gamma: np.ndarray = GAMMA

    @property
    def Gamma(self) -> np.ndarray:
        return big_gamma(self.gamma_X, self.gamma)

    @property
    def cliff4(self) -> tuple:
        return (self.gamma1, self.gamma2, self.gamma3, self.gamma4)

    @property
    def cliff2(self) -> tuple:
        return (self.sigma1, self.sigma2)

    def clifford_defect(self) -> float:
        """max |{γ^i, γ^j} - 2δ^{ij}| over both sets, and |{γ, γ^i}|."""
        worst = 0.0
        for mats, n in ((self.cliff4, 4), (self.cliff2, 2)):
            for i, a in enumerate(mats):
                for j, b in enumerate(mats):
                    target = 2 * np.eye(n) if i == j else 0
                    worst = max(worst, np.max(np.abs(a @ b + b @ a - target)))
        for g in self.cliff4:
            worst = max(worst, np.max(np.abs(self.gamma @ g + g @ self.gamma)))
        return float(worst)


GAMMAS = GammaSet()
