import logging
from enum import Enum
from pathlib import Path
from typing import Optional

import numpy as np
import typer

from app.core.config import resolve_run_config
from app.core.global_error_handler import handle_command_errors
from app.modules.analysis import service as analysis_service
from app.modules.spin.service import simulate_run
from app.repository.matrix_repository import matrix_repository
from app.repository.report_repository import report_repository, sibling
from app.schemas.config_schema import RunConfig

logger = logging.getLogger(__name__)

router = typer.Typer()


class SweepMode(str, Enum):
    fraction = "fraction"
    tau = "tau"


def _reference_matrix(run_config: RunConfig, input: Optional[Path], jobs: Optional[int]) -> np.ndarray:
    if input is not None:
        return matrix_repository.read(input)
    logger.info("No input matrix given, simulating one from the run configuration")
    return simulate_run(run_config, jobs=jobs).values


@router.command("sweep")
@handle_command_errors
def sweep(
    output: Path = typer.Option(..., "--output", "-o", help="Per-repeat CSV to write."),
    mode: SweepMode = typer.Option(SweepMode.fraction, "--mode", help="Sweep sampling fraction or threshold."),
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="TOML run configuration."),
    preset: Optional[str] = typer.Option(None, "--preset", "-p", help="Preset used when no config is given."),
    input: Optional[Path] = typer.Option(None, "--input", "-i", help="Reference MTX file instead of simulating."),
    repeats: Optional[int] = typer.Option(None, "--repeats", min=1, help="Override [sweep] repeats."),
    seed: Optional[int] = typer.Option(None, "--seed", min=0, help="Override [sweep] base_seed."),
    jobs: Optional[int] = typer.Option(None, "--jobs", "-j", min=1, help="Parallel workers."),
):
    """Fidelity against sampling fraction or threshold tau, with mean and std per cell."""
    run_config = resolve_run_config(config, preset)
    sweep_config = run_config.sweep.model_validate({
        **run_config.sweep.model_dump(),
        **({"repeats": repeats} if repeats is not None else {}),
        **({"base_seed": seed} if seed is not None else {}),
    })
    M_tot = _reference_matrix(run_config, input, jobs)
    params = run_config.svt.to_params(*M_tot.shape)

    if mode == SweepMode.fraction:
        records = analysis_service.sweep_sampling_fraction(M_tot, sweep_config, params, jobs=jobs)
        values = analysis_service.singular_spectrum(M_tot)
        report_repository.write_frame(sibling(output, ".singular_values.csv"), report_repository.singular_values_frame(values))
    else:
        records = analysis_service.sweep_tau(M_tot, sweep_config, params, jobs=jobs)

    outcomes = [o for record in records for o in record.outcomes]
    report_repository.write_frame(output, report_repository.outcomes_frame(outcomes))
    report_repository.write_frame(sibling(output, ".summary.csv"), report_repository.summary_frame(records))
    for record in records:
        typer.echo(
            f"fraction={record.fraction:g} tau={record.tau:g} {record.domain} fidelity "
            f"{record.mean_fidelity:.4f} +/- {record.std_fidelity:.4f} "
            f"iterations {record.mean_iterations:.1f} failed {record.failed_count}"
        )


@router.command("peaks-survival")
@handle_command_errors
def peaks_survival(
    output: Path = typer.Option(..., "--output", "-o", help="Per-repeat CSV to write."),
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="TOML run configuration."),
    preset: Optional[str] = typer.Option(None, "--preset", "-p", help="Preset used when no config is given."),
    input: Optional[Path] = typer.Option(None, "--input", "-i", help="Reference MTX file instead of simulating."),
    fraction: float = typer.Option(0.1, "--fraction", "-f", help="Fraction of entries kept."),
    repeats: int = typer.Option(32, "--repeats", min=1),
    threshold: float = typer.Option(0.3, "--threshold", help="Relative peak threshold."),
    tolerance: int = typer.Option(1, "--tolerance", min=0, help="Allowed peak shift in bins."),
    seed: Optional[int] = typer.Option(None, "--seed", min=0, help="Override [sweep] base_seed."),
    jobs: Optional[int] = typer.Option(None, "--jobs", "-j", min=1, help="Parallel workers."),
):
    """How often the full-data peak set survives reconstruction from a fraction of the data."""
    run_config = resolve_run_config(config, preset)
    M_tot = _reference_matrix(run_config, input, jobs)
    params = run_config.svt.to_params(*M_tot.shape)
    summary = analysis_service.peak_survival_study(
        M_tot,
        fraction=fraction,
        repeats=repeats,
        params=params,
        base_seed=seed if seed is not None else run_config.sweep.base_seed,
        threshold=threshold,
        tolerance_bins=tolerance,
        jobs=jobs,
    )
    report_repository.write_frame(output, report_repository.survival_frame(summary))
    typer.echo(
        f"{summary.survived_count}/{summary.repeats} repeats kept every reference peak "
        f"(rate {summary.survival_rate:.3f})"
    )
