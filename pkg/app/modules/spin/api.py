from pathlib import Path
from typing import Optional

import typer

from app.core.config import resolve_run_config
from app.core.global_error_handler import handle_command_errors
from app.modules.spin import service as spin_service
from app.repository.matrix_repository import matrix_repository
from app.repository.report_repository import report_repository, sibling

router = typer.Typer()


@router.command("simulate")
@handle_command_errors
def simulate(
    output: Path = typer.Option(..., "--output", "-o", help="Time-domain MTX file to write."),
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="TOML run configuration."),
    preset: Optional[str] = typer.Option(None, "--preset", "-p", help="misaligned-14N, onaxis-13C or lowrank-synthetic."),
    jobs: Optional[int] = typer.Option(None, "--jobs", "-j", min=1, help="Parallel workers over t1 rows."),
):
    """Simulate a ground-truth time-domain matrix and its grid sidecar."""
    run_config = resolve_run_config(config, preset)
    signal = spin_service.simulate_run(run_config, jobs=jobs)

    matrix_repository.write(output, signal.values)
    grid_path = report_repository.write_grid(sibling(output, ".grid.json"), signal.grid)

    grid = signal.grid
    typer.echo(f"matrix: {output} ({grid.n1}x{grid.n2})")
    typer.echo(f"grid: {grid_path} dt1={grid.dt1:g} s dt2={grid.dt2:g} s t1_start={grid.t1_start:g} s t2_start={grid.t2_start:g} s")
    if signal.nuclear_frequencies_hz.size:
        listed = ", ".join(f"{f / 1e6:.4g}" for f in signal.nuclear_frequencies_hz)
        typer.echo(f"nuclear frequencies (MHz): {listed}")
    for warning in signal.warnings:
        typer.echo(f"warning: {warning}", err=True)
