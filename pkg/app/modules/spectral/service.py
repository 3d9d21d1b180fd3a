import logging
from typing import List, Optional

import numpy as np
import scipy.fft

from app.core.exceptions import ConfigError
from app.modules.linalg.service import as_matrix
from app.schemas.spectrum_schema import Peak, Spectrum2D
from app.schemas.spin_schema import EseemGrid
from app.utils.kernels import strict_local_maxima

logger = logging.getLogger(__name__)


class SpectralInputError(ConfigError):
    pass


def dft2(M, grid: Optional[EseemGrid] = None, zero_fill: int = 1) -> Spectrum2D:
    """Centred 2D DFT, unnormalised forward (the inverse carries 1/(n1 n2)).

    Without a grid both dwell times are 1, so the axes are in cycles per sample.
    `zero_fill` pads each axis to zero_fill times its length before transforming.
    """
    M = as_matrix(M, "time-domain matrix")
    if zero_fill < 1:
        raise SpectralInputError(f"zero_fill must be a positive integer, got {zero_fill}")
    if grid is not None and grid.shape != M.shape:
        raise SpectralInputError(f"grid {grid.shape} does not match matrix shape {M.shape}")
    n1, n2 = M.shape[0] * zero_fill, M.shape[1] * zero_fill
    dt1 = grid.dt1 if grid is not None else 1.0
    dt2 = grid.dt2 if grid is not None else 1.0

    values = scipy.fft.fftshift(scipy.fft.fft2(M, s=(n1, n2)))
    freq1 = scipy.fft.fftshift(scipy.fft.fftfreq(n1, d=dt1))
    freq2 = scipy.fft.fftshift(scipy.fft.fftfreq(n2, d=dt2))
    return Spectrum2D(values=values, freq1=freq1, freq2=freq2, source_grid=grid)


def idft2(spectrum: Spectrum2D) -> np.ndarray:
    return scipy.fft.ifft2(scipy.fft.ifftshift(spectrum.values))


def magnitude(spectrum: Spectrum2D) -> np.ndarray:
    return np.abs(spectrum.values)


def find_peaks(spectrum: Spectrum2D, rel_threshold: float = 0.3) -> List[Peak]:
    """Strict 8-neighbour maxima of |spectrum| at or above rel_threshold * max, strongest first."""
    if not 0 < rel_threshold < 1:
        raise SpectralInputError(f"relative peak threshold must lie in (0, 1), got {rel_threshold}")
    mag = np.ascontiguousarray(magnitude(spectrum), dtype=np.float64)
    top = float(mag.max())
    if top == 0.0:
        return []
    cells = strict_local_maxima(mag, rel_threshold * top)
    amplitudes = mag[cells[:, 0], cells[:, 1]]
    # strongest first; ties keep row-major order
    order = np.argsort(-amplitudes, kind="stable")
    peaks = [
        Peak(
            nu1=float(spectrum.freq1[i]),
            nu2=float(spectrum.freq2[j]),
            amplitude=float(mag[i, j]),
            index1=int(i),
            index2=int(j),
        )
        for i, j in cells[order]
    ]
    logger.debug(f"Found {len(peaks)} peaks above {rel_threshold:g} of the maximum {top:.4g}")
    return peaks


def bin_width(spectrum: Spectrum2D) -> tuple[float, float]:
    return float(spectrum.freq1[1] - spectrum.freq1[0]), float(spectrum.freq2[1] - spectrum.freq2[0])
