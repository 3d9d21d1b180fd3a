from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class SvtParams(BaseModel):
    """Configuration of one singular value thresholding run."""
    model_config = ConfigDict(frozen=True, extra='forbid')

    tau: float = Field(gt=0)
    delta: float = Field(default=1.2, gt=0)
    epsilon: float = Field(default=1e-4, gt=0)
    max_iterations: int = Field(default=5000, gt=0)
    store_history: bool = False
    # Y0 = k0 * delta * P(M) instead of Y0 = 0
    kick_start: bool = True
    # delta >= 2 leaves the provably convergent regime
    allow_divergent_step: bool = False
    divergence_limit: float = Field(default=1e6, gt=0)

    @model_validator(mode="after")
    def check_step(self):
        if self.delta >= 2 and not self.allow_divergent_step:
            raise ValueError(
                f"delta={self.delta} is outside the convergent range (0, 2); "
                "set allow_divergent_step to use it anyway"
            )
        return self


class SvtResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    completed: np.ndarray
    iterations: int
    residual_history: Optional[List[float]] = None
    final_residual: float
    converged: bool
    final_rank: int


class SvtRunReport(BaseModel):
    """What the `complete` command writes next to the completed matrix."""
    iterations: int
    final_residual: float
    final_rank: int
    converged: bool
    tau: float
    delta: float
    epsilon: float
    max_iterations: int
    observed_count: int
    residual_history: Optional[List[float]] = None
