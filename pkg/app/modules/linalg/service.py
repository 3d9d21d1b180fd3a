import logging
from typing import Tuple

import numpy as np
import scipy.linalg

from app.core.exceptions import ConfigError
from app.schemas.linalg_schema import SvdFactorization

logger = logging.getLogger(__name__)


class NonFiniteMatrixError(ConfigError):
    """Raised when a matrix handed to an operation contains NaN or Inf."""


class LinalgInputError(ConfigError):
    pass


def as_matrix(A, name: str = "matrix") -> np.ndarray:
    """Returns A as a 2-D float64/complex128 array, rejecting empty and non-finite input."""
    A = np.asarray(A)
    if A.ndim != 2:
        raise LinalgInputError(f"{name} must be 2-D, got {A.ndim} dimension(s)")
    if min(A.shape) < 1:
        raise LinalgInputError(f"{name} has an empty dimension {A.shape}")
    A = A.astype(np.complex128 if np.iscomplexobj(A) else np.float64, copy=False)
    ensure_finite(A, name)
    return A


def ensure_finite(A: np.ndarray, name: str = "matrix") -> None:
    finite = np.isfinite(A)
    if not finite.all():
        first = tuple(int(k) for k in np.argwhere(~finite)[0])
        raise NonFiniteMatrixError(f"{name} has a non-finite entry {A[first]} at index {first}")


def _fix_signs(U: np.ndarray, V: np.ndarray) -> None:
    # the largest-magnitude entry of each U column becomes real and positive
    pivots = np.argmax(np.abs(U), axis=0)
    lead = U[pivots, np.arange(U.shape[1])]
    magnitude = np.abs(lead)
    phase = np.ones_like(lead)
    nonzero = magnitude > 0
    phase[nonzero] = lead[nonzero] / magnitude[nonzero]
    U *= np.conj(phase)
    V *= np.conj(phase)


def svd(A) -> SvdFactorization:
    """Thin SVD A = U diag(s) V^H with a deterministic sign convention."""
    A = as_matrix(A)
    try:
        U, s, Vh = scipy.linalg.svd(A, full_matrices=False, lapack_driver="gesdd", check_finite=False)
    except np.linalg.LinAlgError:
        logger.debug(f"gesdd did not converge on a {A.shape} matrix, retrying with gesvd")
        U, s, Vh = scipy.linalg.svd(A, full_matrices=False, lapack_driver="gesvd", check_finite=False)
    V = np.ascontiguousarray(Vh.conj().T)
    U = np.ascontiguousarray(U)
    _fix_signs(U, V)
    return SvdFactorization(U=U, singular_values=s, V=V)


def reconstruct(factorization: SvdFactorization) -> np.ndarray:
    return (factorization.U * factorization.singular_values) @ factorization.V.conj().T


def shrink_with_rank(A, tau: float) -> Tuple[np.ndarray, int]:
    """Singular value soft-thresholding; also returns how many values survive."""
    if tau < 0:
        raise LinalgInputError(f"shrinkage threshold must be non-negative, got {tau}")
    f = svd(A)
    kept = f.singular_values > tau
    rank = int(np.count_nonzero(kept))
    if rank == 0:
        return np.zeros((f.U.shape[0], f.V.shape[0]), dtype=f.U.dtype), 0
    shrunk = f.singular_values[kept] - tau
    X = (f.U[:, kept] * shrunk) @ f.V[:, kept].conj().T
    return X, rank


def shrink(A, tau: float) -> np.ndarray:
    return shrink_with_rank(A, tau)[0]


def singular_values(A) -> np.ndarray:
    A = as_matrix(A)
    return scipy.linalg.svdvals(A, check_finite=False)


def frobenius_norm(A) -> float:
    A = as_matrix(A)
    return float(np.linalg.norm(A, "fro"))


def spectral_norm(A) -> float:
    return float(singular_values(A)[0])


def nuclear_norm(A) -> float:
    return float(np.sum(singular_values(A)))
