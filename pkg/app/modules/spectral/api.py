from pathlib import Path
from typing import Optional

import typer

from app.core.global_error_handler import handle_command_errors
from app.modules.spectral import service as spectral_service
from app.repository.matrix_repository import matrix_repository
from app.repository.report_repository import report_repository, sibling

router = typer.Typer()


@router.command("spectrum")
@handle_command_errors
def spectrum(
    matrix: Path = typer.Argument(..., help="Time-domain MTX file."),
    output: Path = typer.Option(..., "--output", "-o", help="Complex spectrum MTX file to write."),
    grid: Optional[Path] = typer.Option(None, "--grid", "-g", help="Grid JSON sidecar written by simulate."),
    peaks: Optional[Path] = typer.Option(None, "--peaks", help="Peaks CSV (default <output>.peaks.csv)."),
    peaks_threshold: float = typer.Option(0.3, "--peaks-threshold", help="Relative peak threshold in (0, 1)."),
    zero_fill: int = typer.Option(1, "--zero-fill", min=1, help="Zero-fill factor per axis."),
    subtract_mean: bool = typer.Option(False, "--subtract-mean", help="Remove the DC level first."),
):
    """2D DFT of a time-domain matrix with its frequency axes and peak list."""
    M = matrix_repository.read(matrix)
    if subtract_mean:
        M = M - M.mean()
    source_grid = report_repository.read_grid(grid) if grid is not None else None

    result = spectral_service.dft2(M, source_grid, zero_fill=zero_fill)
    found = spectral_service.find_peaks(result, peaks_threshold)

    matrix_repository.write(output, result.values)
    report_repository.write_frame(sibling(output, ".axes.csv"), report_repository.axes_frame(result))
    report_repository.write_frame(peaks or sibling(output, ".peaks.csv"), report_repository.peaks_frame(found))
    typer.echo(f"spectrum {result.shape[0]}x{result.shape[1]}, {len(found)} peaks above {peaks_threshold:g}")
    for k, peak in enumerate(found[:10], start=1):
        typer.echo(f"  {k}: ({peak.nu1 / 1e6:+.4f}, {peak.nu2 / 1e6:+.4f}) MHz  amplitude {peak.amplitude:.4g}")
