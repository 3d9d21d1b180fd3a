from pathlib import Path
from typing import Optional

import typer

from app.core.config import resolve_run_config
from app.core.global_error_handler import handle_command_errors
from app.modules.completion import service as completion_service
from app.repository.mask_repository import mask_repository
from app.repository.matrix_repository import matrix_repository
from app.repository.report_repository import report_repository, sibling
from app.schemas.svt_schema import SvtRunReport

router = typer.Typer()


@router.command("complete")
@handle_command_errors
def complete(
    projected: Path = typer.Argument(..., help="Projected MTX file (zero off the mask)."),
    mask: Path = typer.Argument(..., help="MSK file of the observed entries."),
    output: Path = typer.Option(..., "--output", "-o", help="Completed MTX file to write."),
    report: Optional[Path] = typer.Option(None, "--report", help="JSON run report (default <output>.report.json)."),
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="TOML run configuration for [svt] defaults."),
    tau: Optional[float] = typer.Option(None, "--tau", help="Threshold (default 5 * max(rows, cols))."),
    delta: Optional[float] = typer.Option(None, "--delta", help="Step size."),
    eps: Optional[float] = typer.Option(None, "--eps", help="Relative residual tolerance."),
    max_iters: Optional[int] = typer.Option(None, "--max-iters", help="Iteration cap."),
    store_history: bool = typer.Option(False, "--store-history", help="Keep every residual in the report."),
    kick_start: bool = typer.Option(True, "--kick-start/--zero-start", help="Initial Y: scaled P(M) or zero."),
    allow_divergent_step: bool = typer.Option(False, "--allow-divergent-step", help="Accept delta >= 2."),
):
    """Complete a masked matrix with singular value thresholding."""
    observed = matrix_repository.read(projected)
    sample = mask_repository.read(mask)

    section = resolve_run_config(config).svt
    overrides = {
        "tau": tau,
        "delta": delta,
        "epsilon": eps,
        "max_iterations": max_iters,
    }
    section = section.model_validate({
        **section.model_dump(),
        **{k: v for k, v in overrides.items() if v is not None},
        "store_history": store_history or section.store_history,
        "kick_start": kick_start and section.kick_start,
        "allow_divergent_step": allow_divergent_step or section.allow_divergent_step,
    })
    params = section.to_params(*observed.shape)

    result = completion_service.svt_complete(observed, sample, params)
    matrix_repository.write(output, result.completed)
    report_path = report or sibling(output, ".report.json")
    report_repository.write_model(report_path, SvtRunReport(
        iterations=result.iterations,
        final_residual=result.final_residual,
        final_rank=result.final_rank,
        converged=result.converged,
        tau=params.tau,
        delta=params.delta,
        epsilon=params.epsilon,
        max_iterations=params.max_iterations,
        observed_count=sample.count,
        residual_history=result.residual_history,
    ))
    status = "converged" if result.converged else "did not converge"
    typer.echo(
        f"{status} after {result.iterations} iterations: residual {result.final_residual:.3e}, "
        f"rank {result.final_rank}"
    )
