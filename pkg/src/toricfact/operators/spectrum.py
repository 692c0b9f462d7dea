"""Sector-by-sector spectrum of the assembled round-sphere Dirac operator.

Each Fourier sector is discretized in half-density form w^{1/2} D w^{-1/2}
(same spectrum, and the central-difference matrix is exactly Hermitian).  The
operator is odd for the total grading, so its eigenvalues are ±s for the
singular values s of the even-to-odd block; the smallest ones come from
block subspace iteration on (A^H A)^{-1} with a sparse LU of A.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse.linalg as sla

from ..geometry import W_S4
from ..symcalc import MatrixDiffOp, half_density_form
from .gammas import GAMMA
from .numeric import GridSpec, assemble_mode
from .symbolic import build_D_S4


@dataclass(frozen=True)
class SectorSpectrum:
    n1: float
    n2: float
    grid: int
    singular_values: np.ndarray      # ascending; eigenvalues are ±these

    @property
    def lowest(self) -> float:
        return float(self.singular_values[0])

    @property
    def eigenvalues(self) -> np.ndarray:
        s = self.singular_values
        return np.concatenate([s, -s])


def _chiral_split(size: int, n_nodes: int):
    diag = np.real(np.diag(GAMMA))
    comp = np.tile(np.arange(size), n_nodes)
    even = np.flatnonzero(diag[comp] > 0)
    odd = np.flatnonzero(diag[comp] < 0)
    return even, odd


def smallest_singular_values(A, k: int, extra: int = 8, tol: float = 1e-12, maxiter: int = 300,
                             seed: int = 0) -> np.ndarray:
    """k smallest singular values of a sparse square invertible matrix.

    Block subspace iteration on (A^H A)^{-1} with a sparse LU of A and a
    Rayleigh-Ritz step per sweep.  A block method is needed because the
    lattice doubling makes singular values exactly degenerate, and a
    single-vector Krylov method only finds the extra copies through roundoff.
    """
    A = A.tocsc()
    n = A.shape[0]
    k = min(k, n)
    m = min(k + extra, n)
    lu = sla.splu(A)
    inv_normal = lambda X: lu.solve(lu.solve(X, trans="H"))
    rng = np.random.default_rng(seed)
    X, _ = np.linalg.qr(rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m)))
    prev = None
    for _ in range(maxiter):
        Y, _ = np.linalg.qr(inv_normal(X))
        H = Y.conj().T @ inv_normal(Y)
        vals, vecs = la.eigh((H + H.conj().T) / 2)
        X = Y @ vecs[:, ::-1]
        s = 1 / np.sqrt(vals[::-1][:k])
        if prev is not None and np.max(np.abs(s - prev) / s) < tol:
            break
        prev = s
    return np.sort(s)


def sector_block(grid: GridSpec, frequency: tuple, op: MatrixDiffOp | None = None):
    op = half_density_form(build_D_S4(), W_S4) if op is None else op
    return assemble_mode(op, grid, frequency)


def sector_spectrum(n_grid: int, n1: float, n2: float, k: int = 8, rule: str = "uniform") -> SectorSpectrum:
    grid = GridSpec(n_grid, n_grid, rule)
    block = sector_block(grid, (n1, n2)).tocsr()
    even, odd = _chiral_split(4, grid.n_nodes)
    if abs(block[even][:, even]).max() > 0 or abs(block[odd][:, odd]).max() > 0:
        raise ValueError("sector block is not odd for the total grading")
    s = smallest_singular_values(block[even][:, odd], k)
    return SectorSpectrum(n1, n2, n_grid, s)


def sectors(radius: int, offset: float = 0.0) -> list:
    r = range(-radius, radius + 1)
    return [(a + offset, b + offset) for a in r for b in r]


def spectra_over_sectors(n_grid: int, radius: int, offset: float = 0.0, k: int = 8) -> list:
    return [sector_spectrum(n_grid, a, b, k) for a, b in sectors(radius, offset)]


def lowest_over_sectors(spectra: list) -> SectorSpectrum:
    return min(spectra, key=lambda s: s.lowest)


def count_in_window(spectra: list, lo: float, hi: float) -> int:
    """Number of eigenvalues (both signs) with |λ| in [lo, hi] across sectors."""
    return int(sum(2 * np.sum((s.singular_values >= lo) & (s.singular_values <= hi)) for s in spectra))
