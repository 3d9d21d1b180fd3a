import logging
from typing import List, Optional

import numpy as np

from app.modules.analysis.metrics_service import (  # noqa: F401
    AnalysisInputError,
    fidelity,
    peak_recovery,
    recovery_bound_count,
    relative_error,
    singular_spectrum,
    spectral_fidelity,
    spurious_peaks,
)
from app.modules.linalg.service import as_matrix
from app.modules.spectral.service import dft2, find_peaks
from app.schemas.svt_schema import SvtParams
from app.schemas.sweep_schema import PeakSurvivalSummary, RepeatOutcome, SweepConfig, SweepRecord
from app.tasks.sweep_tasks import RepeatTask, run_repeats, run_survival_repeats

logger = logging.getLogger(__name__)


def _aggregate(fraction: float, tau: float, domain: str, outcomes: List[RepeatOutcome]) -> SweepRecord:
    succeeded = [o for o in outcomes if not o.failed]
    key = "fidelity_freq" if domain == "frequency" else "fidelity_time"
    headline = [getattr(o, key) for o in succeeded]

    def mean(values):
        return float(np.mean(values)) if values else float("nan")

    return SweepRecord(
        fraction=fraction,
        tau=tau,
        domain=domain,
        fidelities=headline,
        mean_fidelity=mean(headline),
        std_fidelity=float(np.std(headline)) if headline else float("nan"),
        mean_fidelity_time=mean([o.fidelity_time for o in succeeded]),
        mean_fidelity_freq=mean([o.fidelity_freq for o in succeeded]),
        mean_iterations=mean([o.iterations for o in succeeded]),
        converged_count=sum(o.converged for o in succeeded),
        failed_count=len(outcomes) - len(succeeded),
        outcomes=outcomes,
    )


def _sweep(M_tot, config: SweepConfig, taus: List[float], params_base: SvtParams, jobs: Optional[int]) -> List[SweepRecord]:
    M_tot = as_matrix(M_tot, "reference matrix")
    if np.iscomplexobj(M_tot):
        raise AnalysisInputError("sweeps reconstruct real time-domain data")
    if float(np.linalg.norm(M_tot)) == 0.0:
        raise AnalysisInputError("reference matrix is zero")

    cells = [(f_index, fraction, tau) for tau in taus for f_index, fraction in enumerate(config.fractions)]
    tasks = [
        RepeatTask(f_index, fraction, repeat, params_base.model_copy(update={"tau": tau}))
        for f_index, fraction, tau in cells
        for repeat in range(config.repeats)
    ]
    outcomes = run_repeats(M_tot, tasks, config.base_seed, config.noise_sigma, jobs)

    records = []
    for k, (_, fraction, tau) in enumerate(cells):
        chunk = outcomes[k * config.repeats:(k + 1) * config.repeats]
        record = _aggregate(fraction, tau, config.domain, chunk)
        logger.info(
            f"fraction={fraction:g} tau={tau:g}: mean fidelity {record.mean_fidelity:.4f} "
            f"+/- {record.std_fidelity:.4f}, {record.failed_count} failed"
        )
        records.append(record)
    return records


def sweep_sampling_fraction(M_tot, config: SweepConfig, params: SvtParams, jobs: Optional[int] = None) -> List[SweepRecord]:
    """Fidelity against sampling fraction at the threshold of `params`."""
    return _sweep(M_tot, config, [params.tau], params, jobs)


def sweep_tau(M_tot, config: SweepConfig, params_base: SvtParams, jobs: Optional[int] = None) -> List[SweepRecord]:
    """Fidelity and iteration count over the (tau, fraction) grid.

    Repeat r of fraction f uses the same mask for every tau.
    """
    return _sweep(M_tot, config, list(config.taus), params_base, jobs)


def peak_survival_study(
    M_tot,
    fraction: float,
    repeats: int,
    params: SvtParams,
    base_seed: int = 0,
    threshold: float = 0.3,
    tolerance_bins: int = 1,
    jobs: Optional[int] = None,
) -> PeakSurvivalSummary:
    """How often the full-data peak set survives reconstruction from a fraction of the entries."""
    M_tot = as_matrix(M_tot, "reference matrix")
    if repeats < 1:
        raise AnalysisInputError(f"repeats must be at least 1, got {repeats}")
    reference = find_peaks(dft2(M_tot - M_tot.mean()), threshold)
    tasks = [RepeatTask(0, fraction, repeat, params) for repeat in range(repeats)]
    outcomes = run_survival_repeats(M_tot, reference, tasks, base_seed, threshold, tolerance_bins, jobs)
    survived = sum(o.survived for o in outcomes)
    logger.info(f"{survived}/{repeats} repeats reproduced the {len(reference)}-peak reference set at fraction {fraction:g}")
    return PeakSurvivalSummary(
        fraction=fraction,
        tau=params.tau,
        threshold=threshold,
        tolerance_bins=tolerance_bins,
        repeats=repeats,
        survived_count=survived,
        survival_rate=survived / repeats,
        outcomes=outcomes,
    )
