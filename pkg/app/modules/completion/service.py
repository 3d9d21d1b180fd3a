import logging
import math

import numpy as np

from app.core.exceptions import ConfigError, NumericalError
from app.modules.linalg.service import shrink_with_rank, spectral_norm
from app.schemas.mask_schema import SampleMask
from app.schemas.svt_schema import SvtParams, SvtResult

logger = logging.getLogger(__name__)

PROGRESS_EVERY = 100


class CompletionInputError(ConfigError):
    pass


class SvtDivergenceError(NumericalError):
    def __init__(self, iteration: int, residual_value: float):
        self.iteration = iteration
        super().__init__(
            f"SVT diverged at iteration {iteration}: residual {residual_value:.3e}",
            details={"iteration": iteration, "residual": residual_value},
        )


class NonFiniteIterateError(NumericalError):
    def __init__(self, iteration: int, name: str):
        self.iteration = iteration
        super().__init__(
            f"non-finite values in {name} at iteration {iteration}",
            details={"iteration": iteration},
        )


def default_params(rows: int, cols: int, observed_count: int) -> SvtParams:
    """tau = 5 * max(rows, cols), delta = 1.2, epsilon = 1e-4, 5000 iterations."""
    if rows < 1 or cols < 1 or observed_count < 1:
        raise CompletionInputError(
            f"counts must be positive, got rows={rows}, cols={cols}, observed={observed_count}"
        )
    return SvtParams(tau=5.0 * max(rows, cols), delta=1.2, epsilon=1e-4, max_iterations=5000)


def _observed_values(matrix: np.ndarray, mask: SampleMask, name: str) -> np.ndarray:
    matrix = np.asarray(matrix)
    if tuple(matrix.shape) != mask.shape:
        raise CompletionInputError(f"{name} shape {tuple(matrix.shape)} does not match mask host {mask.shape}")
    return matrix.ravel()[mask.flat]


def residual(X, observed, mask: SampleMask) -> float:
    """||P(X - M)||_F / ||P(M)||_F."""
    m = _observed_values(observed, mask, "observed")
    reference = float(np.linalg.norm(m))
    if reference == 0.0:
        raise CompletionInputError("observed data is zero on every sampled entry")
    x = _observed_values(X, mask, "X")
    return float(np.linalg.norm(x - m)) / reference


def _prepare_observed(observed, mask: SampleMask) -> np.ndarray:
    observed = np.asarray(observed)
    if np.iscomplexobj(observed):
        if np.any(observed.imag != 0):
            raise CompletionInputError("completion works on real time-domain data; got complex entries")
        observed = observed.real
    observed = np.array(observed, dtype=np.float64)
    if tuple(observed.shape) != mask.shape:
        raise CompletionInputError(f"observed shape {tuple(observed.shape)} does not match mask host {mask.shape}")
    if not np.all(np.isfinite(observed)):
        first = tuple(int(k) for k in np.argwhere(~np.isfinite(observed))[0])
        raise CompletionInputError(f"observed data has a non-finite entry at index {first}")
    off_mask = ~mask.as_bool()
    if np.any(observed[off_mask] != 0):
        first = tuple(int(k) for k in np.argwhere(off_mask & (observed != 0))[0])
        raise CompletionInputError(
            f"observed data is nonzero outside the mask (first at {first}); project it onto the mask first"
        )
    return observed


def svt_complete(observed, mask: SampleMask, params: SvtParams) -> SvtResult:
    """Singular value thresholding for min ||X||_* subject to P(X) = P(M).

    X^k = shrink(Y^(k-1), tau); Y^k = Y^(k-1) + delta P(M - X^k); stops once
    ||P(X^k - M)||_F / ||P(M)||_F < epsilon.
    """
    M = _prepare_observed(observed, mask)
    idx = mask.flat
    m = M.ravel()[idx]
    reference = float(np.linalg.norm(m))
    if reference == 0.0:
        raise CompletionInputError("observed data is zero on every sampled entry")
    if params.delta >= 2:
        logger.warning(f"SVT step delta={params.delta} is outside the convergent range (0, 2)")

    if params.kick_start:
        k0 = math.ceil(params.tau / (params.delta * spectral_norm(M)))
        Y = k0 * params.delta * M
    else:
        k0 = 0
        Y = np.zeros_like(M)
    logger.debug(f"SVT start: tau={params.tau}, delta={params.delta}, k0={k0}, |Omega|={mask.count}")

    history = []
    X = np.zeros_like(M)
    rank = 0
    value = 1.0
    converged = False
    iteration = 0
    for iteration in range(1, params.max_iterations + 1):
        if not np.all(np.isfinite(Y)):
            raise NonFiniteIterateError(iteration, "Y")
        X, rank = shrink_with_rank(Y, params.tau)
        if not np.all(np.isfinite(X)):
            raise NonFiniteIterateError(iteration, "X")

        gap = m - X.ravel()[idx]
        value = float(np.linalg.norm(gap)) / reference
        history.append(value)
        if iteration % PROGRESS_EVERY == 0:
            logger.debug(f"SVT iteration {iteration}: residual={value:.3e}, rank={rank}")
        if not math.isfinite(value):
            raise NonFiniteIterateError(iteration, "residual")
        if value > params.divergence_limit:
            raise SvtDivergenceError(iteration, value)
        if value < params.epsilon:
            converged = True
            break

        step = Y.ravel()
        step[idx] += params.delta * gap

    logger.info(
        f"SVT {'converged' if converged else 'stopped'} after {iteration} iterations: "
        f"residual={value:.3e}, rank={rank}"
    )
    return SvtResult(
        completed=X,
        iterations=iteration,
        residual_history=history if params.store_history else None,
        final_residual=value,
        converged=converged,
        final_rank=rank,
    )
