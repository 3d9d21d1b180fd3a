import logging
import math

import numpy as np

from app.core.exceptions import ConfigError
from app.schemas.mask_schema import MAX_SEED, SampleMask
from app.utils.kernels import partial_fisher_yates
from app.utils.seeds import mask_rng

logger = logging.getLogger(__name__)


class MaskError(ConfigError):
    pass


class EmptyComplementError(MaskError):
    pass


def sample_count(rows: int, cols: int, fraction: float) -> int:
    # round half away from zero; fraction * rows * cols is never negative here
    return int(math.floor(fraction * rows * cols + 0.5))


def generate_uniform_mask(rows: int, cols: int, fraction: float, seed: int) -> SampleMask:
    """Draws round(fraction*rows*cols) distinct entries with a seeded partial Fisher-Yates shuffle."""
    if rows < 1 or cols < 1:
        raise MaskError(f"mask host must be at least 1x1, got {rows}x{cols}")
    if not 0 < fraction <= 1:
        raise MaskError(f"sampling fraction must lie in (0, 1], got {fraction}")
    if not 0 <= seed <= MAX_SEED:
        raise MaskError(f"mask seed must be an unsigned 64-bit integer, got {seed}")
    size = rows * cols
    count = sample_count(rows, cols, fraction)
    if count < 1:
        raise MaskError(f"fraction {fraction} selects no entry of a {rows}x{cols} host")

    rng = mask_rng(seed)
    # swap target of step k is uniform on [k, size)
    targets = rng.integers(np.arange(count, dtype=np.int64), size, dtype=np.int64)
    chosen = np.sort(partial_fisher_yates(targets, size))
    logger.debug(f"Generated {count}/{size} mask entries with seed {seed}")
    return SampleMask(rows=rows, cols=cols, flat=chosen, seed=seed)


def full_mask(rows: int, cols: int, seed: int = 0) -> SampleMask:
    return SampleMask(rows=rows, cols=cols, flat=np.arange(rows * cols, dtype=np.int64), seed=seed)


def check_shape(M: np.ndarray, mask: SampleMask) -> None:
    if tuple(M.shape) != mask.shape:
        raise MaskError(f"matrix shape {tuple(M.shape)} does not match mask host {mask.shape}")


def project(M, mask: SampleMask) -> np.ndarray:
    """P_Omega: keeps the entries on the mask and zeroes everything else."""
    M = np.asarray(M)
    check_shape(M, mask)
    out = np.zeros_like(M)
    out.flat[mask.flat] = M.flat[mask.flat]
    return out


def mask_complement(mask: SampleMask) -> SampleMask:
    size = mask.rows * mask.cols
    if mask.count == size:
        raise EmptyComplementError("complement of a full mask is empty")
    remaining = np.setdiff1d(np.arange(size, dtype=np.int64), mask.flat, assume_unique=True)
    return SampleMask(rows=mask.rows, cols=mask.cols, flat=remaining, seed=mask.seed)
