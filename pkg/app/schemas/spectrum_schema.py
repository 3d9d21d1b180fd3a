from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from app.schemas.spin_schema import EseemGrid


class Spectrum2D(BaseModel):
    """Centred 2D spectrum: values[k1, k2] belongs to (freq1[k1], freq2[k2])."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray
    freq1: np.ndarray
    freq2: np.ndarray
    source_grid: Optional[EseemGrid] = None

    @model_validator(mode="after")
    def check_axes(self):
        if self.values.ndim != 2:
            raise ValueError("spectrum values must be a 2-D array")
        if self.values.shape != (self.freq1.size, self.freq2.size):
            raise ValueError(
                f"axis lengths ({self.freq1.size}, {self.freq2.size}) do not match "
                f"spectrum shape {self.values.shape}"
            )
        for axis in (self.freq1, self.freq2):
            if axis.size > 1 and not np.all(np.diff(axis) > 0):
                raise ValueError("frequency axes must be strictly increasing")
        return self

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


class Peak(BaseModel):
    model_config = ConfigDict(frozen=True)

    nu1: float
    nu2: float
    amplitude: float
    index1: int
    index2: int
