import logging
from typing import Optional

import typer

from app.core.config import settings
from app.modules.analysis.api import router as analysis_router
from app.modules.completion.api import router as completion_router
from app.modules.sampling.api import router as sampling_router
from app.modules.spectral.api import router as spectral_router
from app.modules.spin.api import router as spin_router

app = typer.Typer(
    name="eseem-complete",
    help="Reconstruct 2D ESEEM spectra from sparsely sampled time-domain data.",
    no_args_is_help=True,
    add_completion=False,
)


@app.callback()
def configure(
    log_level: Optional[str] = typer.Option(None, "--log-level", help="Overrides LOG_LEVEL from the environment."),
):
    logging.basicConfig(
        level=(log_level or settings.LOG_LEVEL).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


# Include routers
for router in (spin_router, sampling_router, completion_router, spectral_router, analysis_router):
    app.registered_commands.extend(router.registered_commands)


def main():
    app()


if __name__ == "__main__":
    main()
