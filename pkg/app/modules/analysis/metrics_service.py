import math
from typing import List

import numpy as np

from app.core.exceptions import ConfigError
from app.modules.linalg.service import as_matrix, singular_values
from app.modules.spectral.service import dft2, magnitude
from app.schemas.spectrum_schema import Peak


class AnalysisInputError(ConfigError):
    pass


def _pair(M_tot, M_red):
    M_tot = as_matrix(M_tot, "reference matrix")
    M_red = as_matrix(M_red, "reconstructed matrix")
    if M_tot.shape != M_red.shape:
        raise AnalysisInputError(f"matrix shapes differ: {M_tot.shape} vs {M_red.shape}")
    reference = float(np.linalg.norm(M_tot))
    if reference == 0.0:
        raise AnalysisInputError("reference matrix is zero")
    return M_tot, M_red, reference


def fidelity(M_tot, M_red) -> float:
    """F = 1 - ||M_tot - M_red||_F^2 / ||M_tot||_F^2, not clamped."""
    M_tot, M_red, reference = _pair(M_tot, M_red)
    return 1.0 - float(np.linalg.norm(M_tot - M_red)) ** 2 / reference ** 2


def spectral_fidelity(M_tot, M_red) -> float:
    """Fidelity of the DFT magnitude maps."""
    return fidelity(magnitude(dft2(M_tot)), magnitude(dft2(M_red)))


def relative_error(M_tot, M_red) -> float:
    M_tot, M_red, reference = _pair(M_tot, M_red)
    return float(np.linalg.norm(M_tot - M_red)) / reference


def singular_spectrum(M) -> np.ndarray:
    return singular_values(M)


def _count_matched(peaks: List[Peak], others: List[Peak], tolerance_bins: int) -> int:
    if not peaks or not others:
        return 0
    positions = np.array([(p.index1, p.index2) for p in others])
    matched = 0
    for peak in peaks:
        distance = np.abs(positions - np.array([peak.index1, peak.index2])).max(axis=1)
        if np.any(distance <= tolerance_bins):
            matched += 1
    return matched


def peak_recovery(reference: List[Peak], candidate: List[Peak], tolerance_bins: int = 1) -> float:
    """Fraction of reference peaks that have a candidate within tolerance_bins on both axes."""
    if not reference:
        return 1.0
    return _count_matched(reference, candidate, tolerance_bins) / len(reference)


def spurious_peaks(reference: List[Peak], candidate: List[Peak], tolerance_bins: int = 1) -> int:
    """Candidate peaks with no reference peak within tolerance_bins."""
    return len(candidate) - _count_matched(candidate, reference, tolerance_bins)


def recovery_bound_count(n: int, r: int, factor: float = 1.0) -> int:
    """|Omega| = factor * n * r * ln(n), capped at n^2."""
    if n < 2 or r < 1 or factor <= 0:
        raise AnalysisInputError(f"need n >= 2, r >= 1 and factor > 0, got n={n}, r={r}, factor={factor}")
    return min(n * n, int(math.floor(factor * n * r * math.log(n) + 0.5)))
