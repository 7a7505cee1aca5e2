"""Dense symmetric eigendecomposition, spectral pseudoinverse and PSD checks."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

SYM_TOL = 1e-8
PINV_REL_TOL = 1e-10


class NotSymmetricError(ValueError):
    pass


class SymmetricEigen(NamedTuple):
    """Eigenvalues sorted descending; eigenvectors are the matching columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        q = self.eigenvectors
        return (q * self.eigenvalues) @ q.T


def _check_symmetric(M: np.ndarray, tol: float) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotSymmetricError(f"expected a square matrix, got shape {M.shape}")
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    asym = float(np.max(np.abs(M - M.T))) if M.size else 0.0
    if asym > tol * scale:
        raise NotSymmetricError(f"matrix is not symmetric (max |M - M^T| = {asym:.3e})")
    return 0.5 * (M + M.T)


def eig_sym(M, tol_sym: float = SYM_TOL) -> SymmetricEigen:
    M = _check_symmetric(M, tol_sym)
    # LAPACK syevd returns ascending order
    w, q = np.linalg.eigh(M)
    return SymmetricEigen(w[::-1].copy(), q[:, ::-1].copy())


def lambda_max(M) -> float:
    M = _check_symmetric(M, SYM_TOL)
    return float(np.linalg.eigvalsh(M)[-1])


def lambda_min(M) -> float:
    M = _check_symmetric(M, SYM_TOL)
    return float(np.linalg.eigvalsh(M)[0])


def pseudo_inverse(M, rel_tol: float = PINV_REL_TOL) -> np.ndarray:
    """Moore-Penrose inverse of a symmetric matrix via its spectrum.

    Eigenvalues with |lambda| <= rel_tol * max|lambda| are treated as zero.
    """
    w, q = eig_sym(M)
    if w.size == 0:
        return np.zeros_like(np.asarray(M, dtype=float))
    top = float(np.max(np.abs(w)))
    if top == 0.0:
        return np.zeros((w.size, w.size))
    keep = np.abs(w) > rel_tol * top
    qk = q[:, keep]
    out = (qk / w[keep]) @ qk.T
    return 0.5 * (out + out.T)


def is_psd(M, tol: float = 1e-10) -> bool:
    w = eig_sym(M).eigenvalues
    if w.size == 0:
        return True
    return bool(w[-1] >= -tol * max(1.0, float(w[0])))
