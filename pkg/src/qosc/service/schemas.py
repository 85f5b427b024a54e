"""Request and response models for the service endpoints.

Requests forbid unknown fields so a typo fails loudly instead of running a
subtly different experiment. Responses replace NaN aggregates with null,
which keeps the JSON strict; the CLI maps null back to 'nan' in CSV.
"""
from __future__ import annotations

import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from ..core import ModelParams
from ..franck_hertz import CollisionConfig


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModelIn(StrictModel):
    k: float = Field(default=0.2, ge=0)
    a0: float = Field(default=0.05, ge=0)
    omega_d: float = Field(default=2.0, gt=0)
    phi_d: float = 0.0
    eps_den: float = Field(default=1e-6, gt=0)

    def to_params(self) -> ModelParams:
        return ModelParams(k=self.k, a0=self.a0, omega_d=self.omega_d,
                           phi_d=self.phi_d, eps_den=self.eps_den)


class CollisionIn(StrictModel):
    mass_ratio: float = Field(default=1.0, gt=0)
    n_phases: int = Field(default=64, ge=1)
    relax_t_max: float = Field(default=1e4, gt=0)
    settle_tol: float = Field(default=0.05, gt=0)
    settle_eps_below: float = Field(default=1e-3, gt=0)
    settle_window: float = Field(default=50.0, gt=0)
    pump_from_electron: bool = True
    dt: float = Field(default=1e-3, gt=0)

    def to_config(self) -> CollisionConfig:
        return CollisionConfig(mass_ratio=self.mass_ratio, n_phases=self.n_phases,
                               relax_t_max=self.relax_t_max, settle_tol=self.settle_tol,
                               settle_eps_below=self.settle_eps_below,
                               settle_window=self.settle_window,
                               pump_from_electron=self.pump_from_electron, dt=self.dt)


def none_if_nan(x: float) -> Optional[float]:
    return None if math.isnan(x) else x


# ---- simulate ----

class SimulateRequest(StrictModel):
    v0: float
    q0: float = 0.0
    t_max: float = Field(default=100.0, ge=0)
    dt: float = Field(default=1e-3, gt=0)
    sample_stride: int = Field(default=10, ge=1)
    model: ModelIn = Field(default_factory=ModelIn)


class SimulateResponse(StrictModel):
    t: list[float]
    q: list[float]
    v: list[float]
    e: list[float]
    t_fail: Optional[float] = None
    failure_count: int
    duration_s: float


# ---- sweep ----

class SweepRequest(StrictModel):
    v0_grid: list[float] = Field(min_length=1)
    observation_times: list[float] = Field(
        default_factory=lambda: [10.0, 100.0, 1000.0, 10000.0], min_length=1)
    dt: float = Field(default=1e-3, gt=0)
    sample_stride: int = Field(default=100, ge=1)
    band: float = Field(default=0.25, gt=0)
    window: float = Field(default=5.0, gt=0)
    mean_tol: float = Field(default=0.05, gt=0)
    model: ModelIn = Field(default_factory=ModelIn)
    jobs: int = Field(default=1, ge=1)


class SweepRow(StrictModel):
    v0: float
    t_obs: float
    energy: Optional[float] = None
    level: Optional[int] = None
    settled_energy: Optional[float] = None
    failed: bool = False


class SweepResponse(StrictModel):
    rows: list[SweepRow]
    failure_count: int
    duration_s: float


# ---- staircase ----

class StaircaseRequest(StrictModel):
    v0: Optional[float] = None
    e0: Optional[float] = None
    t_max: float = Field(default=1e5, gt=0)
    dt: float = Field(default=1e-3, gt=0)
    sample_stride: int = Field(default=100, ge=1)
    model: ModelIn = Field(default_factory=ModelIn)
    include_trajectory: bool = False


class TransitionRow(StrictModel):
    from_level: int
    to_level: int
    t_leave: float
    t_arrive: float
    duration: float


class PlateauRow(StrictModel):
    level: int
    t_first: float
    t_settle: float
    t_last: float
    settled_energy: float


class TrajectoryColumns(StrictModel):
    t: list[float]
    q: list[float]
    v: list[float]
    e: list[float]


class StaircaseResponse(StrictModel):
    transitions: list[TransitionRow]
    plateaus: list[PlateauRow]
    final_level: Optional[int] = None
    trajectory: Optional[TrajectoryColumns] = None
    t_fail: Optional[float] = None
    failure_count: int
    duration_s: float


# ---- lifetimes ----

class LifetimesRequest(StrictModel):
    levels: list[int] = Field(default_factory=lambda: [1, 2, 3], min_length=1)
    ensemble_size: int = Field(default=32, ge=1)
    seed: int = 0
    t_max: float = Field(default=2e4, gt=0)
    dt: float = Field(default=1e-3, gt=0)
    exit_threshold: float = Field(default=0.1, gt=0)
    confirm_depth: float = Field(default=0.4, gt=0)
    model: ModelIn = Field(default_factory=ModelIn)
    jobs: int = Field(default=1, ge=1)


class LifetimeRow(StrictModel):
    level: int
    mean: Optional[float] = None
    std: Optional[float] = None
    count: int
    censored: int


class LifetimesResponse(StrictModel):
    rows: list[LifetimeRow]
    failure_count: int
    duration_s: float


# ---- uncertainty ----

class UncertaintyRequest(StrictModel):
    level: int = Field(default=2, ge=1)
    delta_e: list[float] = Field(default_factory=lambda: [0.05, 0.1, 0.2], min_length=1)
    escape_depth: float = Field(default=0.4, gt=0)
    t_budget: float = Field(default=1e4, gt=0)
    dt: float = Field(default=1e-3, gt=0)
    model: ModelIn = Field(default_factory=lambda: ModelIn(a0=0.0))


class UncertaintyRow(StrictModel):
    n: int
    delta_e: float
    delta_t: float
    product: float
    predicted: float


class UncertaintyResponse(StrictModel):
    rows: list[UncertaintyRow]
    failure_count: int
    duration_s: float


# ---- franck-hertz ----

class FranckHertzRequest(StrictModel):
    t0_grid: list[float] = Field(min_length=1)
    collision: CollisionIn = Field(default_factory=CollisionIn)
    model: ModelIn = Field(default_factory=lambda: ModelIn(a0=0.0))
    jobs: int = Field(default=1, ge=1)


class FHCurveRow(StrictModel):
    t0: float
    mean_final_energy: Optional[float] = None
    mean_final_speed: Optional[float] = None
    n_phases: int
    non_settled_count: int


class FranckHertzResponse(StrictModel):
    rows: list[FHCurveRow]
    non_settled_total: int
    failure_count: int
    duration_s: float


class HealthResponse(StrictModel):
    status: str
    version: str
