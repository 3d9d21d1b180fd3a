import math
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.schemas.spin_schema import (
    CarbonCoupling,
    EseemGrid,
    SpinSystem,
    SyntheticPeak,
    as_tensor,
    check_symmetric,
)
from app.schemas.svt_schema import SvtParams
from app.schemas.sweep_schema import SweepConfig

MHZ = 2 * math.pi * 1e6
GHZ = 2 * math.pi * 1e9

Tensor = List[List[float]]


class StrictModel(BaseModel):
    model_config = ConfigDict(extra='forbid')


class SimulationSection(StrictModel):
    model: Literal["eseem", "synthetic"] = "eseem"
    # stimulated-echo pathway only, as recorded by a four-step phase cycle on pulses 1-3
    select_pathway: bool = True
    # detector counts: the mean-subtracted matrix is rescaled to this RMS; None keeps populations
    signal_rms: Optional[float] = Field(default=None, gt=0)


class SpinSection(StrictModel):
    """Spin parameters in laboratory units (GHz, MHz, gauss, degrees)."""
    D_ghz: float = Field(default=2.87, gt=0)
    g: float = Field(default=2.003, gt=0)
    field_gauss: float = Field(default=0.0, ge=0)
    field_polar_deg: float = 0.0
    field_azimuth_deg: float = 0.0
    field_vector_gauss: Optional[List[float]] = Field(default=None, min_length=3, max_length=3)
    a14n_mhz: Tensor = Field(default_factory=lambda: [[0.0] * 3 for _ in range(3)])
    a13c_mhz: Optional[Tensor] = None
    nuclear_zeeman: bool = False
    quadrupole_mhz: float = 0.0

    @model_validator(mode="after")
    def check_field(self):
        if self.field_vector_gauss is not None and self.field_gauss != 0.0:
            raise ValueError("give either field_vector_gauss or field_gauss with angles, not both")
        for name in ("a14n_mhz", "a13c_mhz"):
            tensor = getattr(self, name)
            if tensor is not None:
                check_symmetric(as_tensor(tensor), name)
        return self

    def field_vector(self) -> np.ndarray:
        if self.field_vector_gauss is not None:
            return np.array(self.field_vector_gauss, dtype=float)
        theta = math.radians(self.field_polar_deg)
        phi = math.radians(self.field_azimuth_deg)
        return self.field_gauss * np.array([
            math.sin(theta) * math.cos(phi),
            math.sin(theta) * math.sin(phi),
            math.cos(theta),
        ])

    def to_spin_system(self) -> SpinSystem:
        carbon = None
        if self.a13c_mhz is not None:
            carbon = CarbonCoupling(A_13C=MHZ * np.array(self.a13c_mhz, dtype=float))
        return SpinSystem(
            D=GHZ * self.D_ghz,
            g=self.g,
            B=self.field_vector(),
            A_14N=MHZ * np.array(self.a14n_mhz, dtype=float),
            carbon=carbon,
            nuclear_zeeman=self.nuclear_zeeman,
            quadrupole=MHZ * self.quadrupole_mhz,
        )


class SyntheticSection(StrictModel):
    peaks: List[SyntheticPeak] = []


class SvtSection(StrictModel):
    # None means 5 * max(rows, cols)
    tau: Optional[float] = Field(default=None, gt=0)
    delta: float = Field(default=1.2, gt=0)
    epsilon: float = Field(default=1e-4, gt=0)
    max_iterations: int = Field(default=5000, gt=0)
    store_history: bool = False
    kick_start: bool = True
    allow_divergent_step: bool = False

    def to_params(self, rows: int, cols: int) -> SvtParams:
        tau = self.tau if self.tau is not None else 5.0 * max(rows, cols)
        return SvtParams(
            tau=tau,
            delta=self.delta,
            epsilon=self.epsilon,
            max_iterations=self.max_iterations,
            store_history=self.store_history,
            kick_start=self.kick_start,
            allow_divergent_step=self.allow_divergent_step,
        )


class RunConfig(StrictModel):
    simulation: SimulationSection = SimulationSection()
    spin: SpinSection = SpinSection()
    grid: EseemGrid = EseemGrid()
    synthetic: SyntheticSection = SyntheticSection()
    svt: SvtSection = SvtSection()
    sweep: SweepConfig = SweepConfig()

    @model_validator(mode="after")
    def check_model_inputs(self):
        if self.simulation.model == "synthetic" and not self.synthetic.peaks:
            raise ValueError("the synthetic model needs at least one [[synthetic.peaks]] entry")
        return self
