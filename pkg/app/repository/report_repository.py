import io
from pathlib import Path
from typing import List

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError

from app.core.exceptions import StorageError
from app.repository.base_repository import BaseRepository, PathLike
from app.schemas.spectrum_schema import Peak, Spectrum2D
from app.schemas.spin_schema import EseemGrid
from app.schemas.sweep_schema import PeakSurvivalSummary, RepeatOutcome, SweepRecord

FLOAT_FORMAT = "%.17g"

OUTCOME_COLUMNS = [
    "fraction", "tau", "repeat", "seed", "fidelity_time", "fidelity_freq",
    "iterations", "converged", "final_rank", "error",
]
SUMMARY_COLUMNS = [
    "fraction", "tau", "domain", "repeats", "mean_fidelity", "std_fidelity",
    "mean_fidelity_time", "mean_fidelity_freq", "mean_iterations", "converged_count", "failed_count",
]


def sibling(path: PathLike, suffix: str) -> Path:
    """`run.csv` + `.summary.csv` -> `run.summary.csv`; `out.mtx` + `.grid.json` -> `out.mtx.grid.json`."""
    path = Path(path)
    if path.suffix == ".csv":
        return path.with_name(path.stem + suffix)
    return path.with_name(path.name + suffix)


class ReportRepository(BaseRepository):
    """CSV reports (pandas) and JSON documents (pydantic)."""

    def write_frame(self, path: PathLike, frame: pd.DataFrame) -> Path:
        buffer = io.StringIO()
        frame.to_csv(buffer, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        return self.write_text(path, buffer.getvalue())

    def read_frame(self, path: PathLike) -> pd.DataFrame:
        text = self.read_text(path)
        try:
            return pd.read_csv(io.StringIO(text))
        except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise StorageError(f"Cannot parse CSV {path}: {e}")

    def write_model(self, path: PathLike, model: BaseModel) -> Path:
        return self.write_text(path, model.model_dump_json(indent=2) + "\n")

    def write_grid(self, path: PathLike, grid: EseemGrid) -> Path:
        return self.write_model(path, grid)

    def read_grid(self, path: PathLike) -> EseemGrid:
        text = self.read_text(path)
        try:
            return EseemGrid.model_validate_json(text)
        except ValidationError as e:
            raise StorageError(f"Invalid grid file {path}: {e.errors()[0]['msg']}")

    # frames

    def outcomes_frame(self, outcomes: List[RepeatOutcome]) -> pd.DataFrame:
        frame = pd.DataFrame([o.model_dump(exclude={"seed"}) for o in outcomes], columns=OUTCOME_COLUMNS)
        frame["seed"] = pd.Series([o.seed for o in outcomes], dtype="uint64")
        return frame

    def summary_frame(self, records: List[SweepRecord]) -> pd.DataFrame:
        rows = [
            {**r.model_dump(exclude={"fidelities", "outcomes"}), "repeats": len(r.outcomes)}
            for r in records
        ]
        return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)

    def singular_values_frame(self, values: np.ndarray) -> pd.DataFrame:
        return pd.DataFrame({"index": np.arange(1, len(values) + 1), "singular_value": values})

    def peaks_frame(self, peaks: List[Peak]) -> pd.DataFrame:
        frame = pd.DataFrame(
            [p.model_dump() for p in peaks],
            columns=["nu1", "nu2", "amplitude", "index1", "index2"],
        )
        frame.insert(0, "rank", np.arange(1, len(peaks) + 1))
        return frame.rename(columns={"nu1": "nu1_hz", "nu2": "nu2_hz"})

    def axes_frame(self, spectrum: Spectrum2D) -> pd.DataFrame:
        parts = []
        for axis, freq in ((1, spectrum.freq1), (2, spectrum.freq2)):
            parts.append(pd.DataFrame({"axis": axis, "index": np.arange(freq.size), "frequency_hz": freq}))
        return pd.concat(parts, ignore_index=True)

    def survival_frame(self, summary: PeakSurvivalSummary) -> pd.DataFrame:
        frame = pd.DataFrame(
            [o.model_dump(exclude={"seed"}) for o in summary.outcomes],
            columns=["repeat", "seed", "reference_peaks", "recovered_peaks", "recovered_fraction", "spurious_peaks", "survived", "error"],
        )
        frame["seed"] = pd.Series([o.seed for o in summary.outcomes], dtype="uint64")
        return frame


report_repository = ReportRepository()
