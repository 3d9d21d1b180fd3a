from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.schemas.mask_schema import MAX_SEED


class SweepConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    fractions: List[float] = Field(
        default_factory=lambda: [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
        min_length=1,
    )
    taus: List[float] = Field(default_factory=lambda: [100.0], min_length=1)
    repeats: int = Field(default=128, ge=1)
    base_seed: int = Field(default=0, ge=0, le=MAX_SEED)
    # additive Gaussian std in units of the data RMS
    noise_sigma: float = Field(default=0.0, ge=0)
    domain: Literal["time", "frequency"] = "frequency"

    @field_validator("fractions")
    def check_fractions(cls, v):
        for fraction in v:
            if not 0 < fraction <= 1:
                raise ValueError(f"sampling fraction {fraction} is outside (0, 1]")
        return v

    @field_validator("taus")
    def check_taus(cls, v):
        for tau in v:
            if not tau > 0:
                raise ValueError(f"threshold tau {tau} must be positive")
        return v


class RepeatOutcome(BaseModel):
    """One (fraction, tau, repeat) reconstruction; failed repeats carry `error`."""
    model_config = ConfigDict(frozen=True)

    fraction: float
    tau: float
    repeat: int
    seed: int
    fidelity_time: Optional[float] = None
    fidelity_freq: Optional[float] = None
    iterations: int = 0
    converged: bool = False
    final_rank: int = 0
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


class SweepRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    fraction: float
    tau: float
    domain: Literal["time", "frequency"]
    fidelities: List[float]
    mean_fidelity: float
    std_fidelity: float
    mean_fidelity_time: float
    mean_fidelity_freq: float
    mean_iterations: float
    converged_count: int
    failed_count: int = 0
    outcomes: List[RepeatOutcome] = []


class PeakSurvivalOutcome(BaseModel):
    model_config = ConfigDict(frozen=True)

    repeat: int
    seed: int
    reference_peaks: int
    recovered_peaks: int = 0
    recovered_fraction: float = 0.0
    # candidate peaks with no reference partner
    spurious_peaks: int = 0
    survived: bool = False
    error: Optional[str] = None


class PeakSurvivalSummary(BaseModel):
    fraction: float
    tau: float
    threshold: float
    tolerance_bins: int
    repeats: int
    survived_count: int
    survival_rate: float
    outcomes: List[PeakSurvivalOutcome]
