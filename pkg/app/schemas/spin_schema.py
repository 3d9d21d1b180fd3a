import math
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

TWO_PI = 2 * math.pi
SYMMETRY_TOLERANCE = 1e-12


def as_tensor(v) -> np.ndarray:
    arr = np.array(v, dtype=float)
    if arr.shape != (3, 3):
        raise ValueError(f"hyperfine tensor must be 3x3, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("hyperfine tensor has non-finite components")
    arr.setflags(write=False)
    return arr


def check_symmetric(tensor: np.ndarray, name: str) -> None:
    scale = max(float(np.linalg.norm(tensor)), 1.0)
    asymmetry = float(np.linalg.norm(tensor - tensor.T))
    if asymmetry > SYMMETRY_TOLERANCE * scale:
        raise ValueError(f"{name} is not symmetric (|A - A^T| = {asymmetry:.3e})")


class CarbonCoupling(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    A_13C: np.ndarray

    @field_validator("A_13C", mode="before")
    def coerce_tensor(cls, v):
        return as_tensor(v)

    @model_validator(mode="after")
    def check_symmetry(self):
        check_symmetric(self.A_13C, "A_13C")
        return self


class SpinSystem(BaseModel):
    """NV ground state with a 14N and optionally one 13C nucleus.

    Energies and couplings are angular frequencies (rad/s); the field is in gauss
    with z along the NV axis.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    D: float = Field(default=TWO_PI * 2.87e9, gt=0)
    g: float = Field(default=2.003, gt=0)
    B: np.ndarray = Field(default_factory=lambda: np.zeros(3))
    A_14N: np.ndarray = Field(default_factory=lambda: np.zeros((3, 3)))
    carbon: Optional[CarbonCoupling] = None
    nuclear_zeeman: bool = False
    # 14N quadrupole P (rad/s) in P (Iz^2 - I(I+1)/3)
    quadrupole: float = 0.0

    @field_validator("B", mode="before")
    def as_field_vector(cls, v):
        arr = np.array(v, dtype=float).ravel()
        if arr.shape != (3,):
            raise ValueError(f"B must be a 3-vector, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("B has non-finite components")
        arr.setflags(write=False)
        return arr

    @field_validator("A_14N", mode="before")
    def coerce_tensor(cls, v):
        return as_tensor(v)

    @model_validator(mode="after")
    def check_symmetry(self):
        check_symmetric(self.A_14N, "A_14N")
        return self

    @property
    def dimension(self) -> int:
        return 18 if self.carbon is not None else 9


class EseemGrid(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    n1: int = Field(default=201, ge=2)
    n2: int = Field(default=201, ge=2)
    dt1: float = Field(default=40e-9, gt=0)
    dt2: float = Field(default=40e-9, gt=0)
    t1_start: float = Field(default=0.0, ge=0)
    t2_start: float = Field(default=0.0, ge=0)

    @property
    def t1(self) -> np.ndarray:
        return self.t1_start + self.dt1 * np.arange(self.n1)

    @property
    def t2(self) -> np.ndarray:
        return self.t2_start + self.dt2 * np.arange(self.n2)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n1, self.n2)

    @property
    def nyquist1(self) -> float:
        return 1.0 / (2.0 * self.dt1)

    @property
    def nyquist2(self) -> float:
        return 1.0 / (2.0 * self.dt2)


class SyntheticPeak(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    nu1: float
    nu2: float
    amplitude: float = 1.0
    phase: float = 0.0


class EseemSignal(BaseModel):
    """A simulated time-domain matrix with its grid and simulation diagnostics."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray
    grid: EseemGrid
    warnings: List[str] = []
    nuclear_frequencies_hz: np.ndarray = Field(default_factory=lambda: np.zeros(0))
