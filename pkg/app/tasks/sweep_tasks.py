"""Per-repeat work units of the sweep harness.

Each unit derives its own seeds, so units can run in any order, in any
process, and still reproduce the same outcome.
"""
import logging
import traceback
from typing import List, NamedTuple, Optional

import numpy as np
from joblib import Parallel, delayed

from app.core.config import settings
from app.core.exceptions import DomainError
from app.modules.analysis.metrics_service import fidelity, peak_recovery, spurious_peaks
from app.modules.completion.service import svt_complete
from app.modules.sampling.service import generate_uniform_mask, project
from app.modules.spectral.service import dft2, find_peaks, magnitude
from app.schemas.spectrum_schema import Peak
from app.schemas.svt_schema import SvtParams
from app.schemas.sweep_schema import PeakSurvivalOutcome, RepeatOutcome
from app.utils.seeds import derive_mask_seed, noise_rng

logger = logging.getLogger(__name__)


class RepeatTask(NamedTuple):
    fraction_index: int
    fraction: float
    repeat: int
    params: SvtParams


def _handle_repeat_failure(task: RepeatTask, seed: int, exception: Exception) -> RepeatOutcome:
    if isinstance(exception, DomainError):
        reason = exception.detail
        logger.warning(
            f"Repeat {task.repeat} (fraction={task.fraction}, tau={task.params.tau}) failed: {reason}"
        )
    else:
        reason = f"{type(exception).__name__}: {exception}"
        logger.error(f"Repeat {task.repeat} failed unexpectedly: {reason}\n{traceback.format_exc()}")
    return RepeatOutcome(
        fraction=task.fraction,
        tau=task.params.tau,
        repeat=task.repeat,
        seed=seed,
        error=reason,
    )


def observe(M_tot: np.ndarray, fraction: float, seed: int, noise_sigma: float):
    """Mask, project and optionally add seeded Gaussian noise on the observed entries."""
    rows, cols = M_tot.shape
    mask = generate_uniform_mask(rows, cols, fraction, seed)
    observed = project(M_tot, mask)
    if noise_sigma > 0:
        sigma = noise_sigma * float(np.sqrt(np.mean(M_tot ** 2)))
        noise = noise_rng(seed).standard_normal(mask.count)
        flat = observed.ravel()
        flat[mask.flat] += sigma * noise
    return mask, observed


def run_repeat(
    M_tot: np.ndarray,
    reference_magnitude: np.ndarray,
    task: RepeatTask,
    base_seed: int,
    noise_sigma: float,
) -> RepeatOutcome:
    seed = derive_mask_seed(base_seed, task.fraction_index, task.repeat)
    try:
        mask, observed = observe(M_tot, task.fraction, seed, noise_sigma)
        result = svt_complete(observed, mask, task.params)
        return RepeatOutcome(
            fraction=task.fraction,
            tau=task.params.tau,
            repeat=task.repeat,
            seed=seed,
            fidelity_time=fidelity(M_tot, result.completed),
            fidelity_freq=fidelity(reference_magnitude, magnitude(dft2(result.completed))),
            iterations=result.iterations,
            converged=result.converged,
            final_rank=result.final_rank,
        )
    except Exception as e:
        return _handle_repeat_failure(task, seed, e)


def run_repeats(
    M_tot: np.ndarray,
    tasks: List[RepeatTask],
    base_seed: int,
    noise_sigma: float = 0.0,
    jobs: Optional[int] = None,
) -> List[RepeatOutcome]:
    """Outcomes in the order of `tasks`, whatever the worker count."""
    reference_magnitude = magnitude(dft2(M_tot))
    jobs = jobs or settings.SWEEP_JOBS
    logger.info(f"Running {len(tasks)} reconstructions with {jobs} worker(s)")
    if jobs == 1:
        return [run_repeat(M_tot, reference_magnitude, task, base_seed, noise_sigma) for task in tasks]
    return Parallel(n_jobs=jobs, backend=settings.JOBLIB_BACKEND)(
        delayed(run_repeat)(M_tot, reference_magnitude, task, base_seed, noise_sigma) for task in tasks
    )


def run_survival_repeat(
    M_tot: np.ndarray,
    reference: List[Peak],
    task: RepeatTask,
    base_seed: int,
    threshold: float,
    tolerance_bins: int,
) -> PeakSurvivalOutcome:
    seed = derive_mask_seed(base_seed, task.fraction_index, task.repeat)
    try:
        mask, observed = observe(M_tot, task.fraction, seed, 0.0)
        result = svt_complete(observed, mask, task.params)
        completed = result.completed - result.completed.mean()
        candidate = find_peaks(dft2(completed), threshold)
        recovered = peak_recovery(reference, candidate, tolerance_bins)
        extra = spurious_peaks(reference, candidate, tolerance_bins)
        return PeakSurvivalOutcome(
            repeat=task.repeat,
            seed=seed,
            reference_peaks=len(reference),
            recovered_peaks=int(round(recovered * len(reference))),
            recovered_fraction=recovered,
            spurious_peaks=extra,
            survived=recovered == 1.0 and extra == 0,
        )
    except Exception as e:
        failed = _handle_repeat_failure(task, seed, e)
        return PeakSurvivalOutcome(repeat=task.repeat, seed=seed, reference_peaks=len(reference), error=failed.error)


def run_survival_repeats(
    M_tot: np.ndarray,
    reference: List[Peak],
    tasks: List[RepeatTask],
    base_seed: int,
    threshold: float,
    tolerance_bins: int,
    jobs: Optional[int] = None,
) -> List[PeakSurvivalOutcome]:
    jobs = jobs or settings.SWEEP_JOBS
    if jobs == 1:
        return [run_survival_repeat(M_tot, reference, t, base_seed, threshold, tolerance_bins) for t in tasks]
    return Parallel(n_jobs=jobs, backend=settings.JOBLIB_BACKEND)(
        delayed(run_survival_repeat)(M_tot, reference, t, base_seed, threshold, tolerance_bins) for t in tasks
    )
