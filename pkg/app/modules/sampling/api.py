from pathlib import Path

import typer

from app.core.global_error_handler import handle_command_errors
from app.modules.sampling import service as sampling_service
from app.repository.mask_repository import mask_repository
from app.repository.matrix_repository import matrix_repository

router = typer.Typer()


@router.command("mask")
@handle_command_errors
def mask(
    input: Path = typer.Argument(..., help="Full time-domain MTX file."),
    fraction: float = typer.Option(..., "--fraction", "-f", help="Fraction of entries to keep, in (0, 1]."),
    seed: int = typer.Option(..., "--seed", "-s", help="Unsigned 64-bit mask seed."),
    mask_output: Path = typer.Option(..., "--mask-output", "-m", help="MSK file to write."),
    output: Path = typer.Option(..., "--output", "-o", help="Projected MTX file to write."),
):
    """Draw a uniform random mask and project the matrix onto it."""
    M = matrix_repository.read(input)
    rows, cols = M.shape
    sample = sampling_service.generate_uniform_mask(rows, cols, fraction, seed)
    mask_repository.write(mask_output, sample)
    matrix_repository.write(output, sampling_service.project(M, sample))
    typer.echo(f"kept {sample.count} of {rows * cols} entries ({sample.fraction:.4%}), seed {seed}")
