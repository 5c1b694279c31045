"""Dense small-matrix numeric substrate.

Everything downstream works with symmetric matrices of dimension <= 6:
quadratic-form bases, cone matrices, and the symmetrized products
A^T P + P A whose definiteness decides certificates.  The heavy lifting
is delegated to LAPACK through numpy/scipy; this module pins the
contracts (sorted spectra, orthonormal eigenvectors, symmetry checks)
that the rest of the package relies on.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidInputError


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition of a symmetric matrix.

    ``eigenvalues`` is sorted ascending; column k of ``eigenvectors``
    belongs to ``eigenvalues[k]`` and the columns are orthonormal.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        v = self.eigenvectors
        return v @ np.diag(self.eigenvalues) @ v.T


def as_square(M, name="matrix"):
    """Validate and return a float square array; rejects non-finite input."""
    A = np.asarray(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return A


def as_symmetric(M, name="matrix", tol=1e-8):
    """Validate symmetry up to representation noise and symmetrize exactly."""
    A = as_square(M, name)
    scale = max(1.0, float(np.abs(A).max()))
    if np.abs(A - A.T).max() > tol * scale:
        raise InvalidInputError(f"{name} is not symmetric")
    return 0.5 * (A + A.T)


def eig_sym(M):
    """Spectrum of a symmetric matrix (ascending eigenvalues)."""
    A = as_symmetric(M)
    w, v = np.linalg.eigh(A)
    return Spectrum(eigenvalues=w, eigenvectors=v)


def expm(A, t=1.0):
    """Matrix exponential e^{A t}."""
    B = as_square(A)
    if not np.isfinite(t):
        raise InvalidInputError("expm: t must be finite")
    return scipy.linalg.expm(B * float(t))


def negdef_margin(M):
    """Largest eigenvalue of a symmetric matrix; M < 0 iff the result < 0."""
    return float(eig_sym(M).eigenvalues[-1])


def is_positive_definite(M, floor=0.0):
    return -negdef_margin(-as_symmetric(M)) > floor


def solve_lyapunov(A, rhs=None):
    """P solving A^T P + P A = rhs (default rhs = -I), for Hurwitz A."""
    B = as_square(A)
    n = B.shape[0]
    if rhs is None:
        rhs = -np.eye(n)
    P = scipy.linalg.solve_continuous_lyapunov(B.T, np.asarray(rhs, dtype=float))
    return 0.5 * (P + P.T)


def project_psd(M, floor=0.0):
    """Nearest (Frobenius) symmetric matrix with eigenvalues >= floor."""
    s = eig_sym(M)
    w = np.maximum(s.eigenvalues, floor)
    return s.eigenvectors @ np.diag(w) @ s.eigenvectors.T
