"""Experiment drivers: occupancy sweeps, staircase runs, level lifetimes
and the energy-time uncertainty measurement.

The occupancy sweep integrates each initial velocity once, up to the last
observation time, and reads every requested time off that single
trajectory. A row's settled level is the plateau containing its
observation time, so an early observation inside a plateau whose
qualifying window completes slightly later still reports the level the
system is visibly sitting on.

Lifetime ensembles randomize only the drive phase (seeded and
reproducible); each member starts exactly on its target level. The
uncertainty scan perturbs an undriven oscillator to E_n - delta_e and
times the escape to E_n - 0.4, the linearized deviation-growth picture
behind the predicted product 2*E_n / (gamma0 * (2*E_n - 1)).

Members of a sweep or ensemble are independent; with jobs > 1 they run on
a thread pool (the kernels release the GIL). Results are always collected
in input order, so the output is identical at any worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, TypeVar

import numpy as np

from . import _kernels
from .core import Level, ModelParams
from .integrator import (IntegratorConfig, Plateau, Trajectory,
                         TransitionEvent, extract_transitions, integrate,
                         integrate_partial, segment_plateaus)
from .core import OscillatorState

__all__ = [
    "SweepConfig",
    "OccupancyRow",
    "LifetimeStat",
    "UncertaintyRecord",
    "occupancy_sweep",
    "staircase",
    "lifetime_stats",
    "uncertainty_scan",
    "predicted_uncertainty_product",
]

_T = TypeVar("_T")
_U = TypeVar("_U")


def map_ordered(fn: Callable[[_T], _U], items: Sequence[_T], jobs: int = 1) -> list[_U]:
    """Apply fn to items, optionally on a thread pool, preserving order."""
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    if jobs == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class SweepConfig:
    """Initial velocities, observation times and shared run parameters."""

    v0_grid: tuple[float, ...]
    observation_times: tuple[float, ...] = (10.0, 100.0, 1000.0, 10000.0)
    params: ModelParams = field(default_factory=ModelParams)
    integrator: IntegratorConfig = field(
        default_factory=lambda: IntegratorConfig(dt=1e-3, t_max=0.0, sample_stride=100))
    band: float = 0.25
    window: float = 5.0
    mean_tol: float = 0.05

    def __post_init__(self) -> None:
        if len(self.v0_grid) == 0:
            raise ValueError("v0_grid must be nonempty")
        ts = self.observation_times
        if len(ts) == 0 or any(t <= 0 for t in ts) or any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("observation_times must be positive and strictly increasing")


@dataclass(frozen=True)
class OccupancyRow:
    """One (v0, t_obs) observation; settled_level is None mid-transit.

    failed marks a run that hit a numerical failure before t_obs; its
    energy_at_t is NaN and it carries no level.
    """

    v0: float
    t_obs: float
    energy_at_t: float
    settled_level: Optional[Level]
    settled_energy: Optional[float]
    failed: bool = False


@dataclass(frozen=True)
class LifetimeStat:
    """Aggregated plateau lifetimes at one level.

    sample_count counts members that departed within the time budget;
    censored_count the rest. With zero departures mean and std are NaN.
    """

    level: Level
    mean_lifetime: float
    std_lifetime: float
    sample_count: int
    censored_count: int


@dataclass(frozen=True)
class UncertaintyRecord:
    level: Level
    delta_e: float
    delta_t: float
    product: float
    predicted: float


def _occupancy_one(v0: float, sweep: SweepConfig) -> list[OccupancyRow]:
    t_end = sweep.observation_times[-1]
    cfg = IntegratorConfig(dt=sweep.integrator.dt, t_max=t_end,
                           sample_stride=sweep.integrator.sample_stride)
    traj, t_fail = integrate_partial(OscillatorState(t=0.0, q=0.0, v=v0),
                                     cfg, sweep.params)
    plats = segment_plateaus(traj, band=sweep.band, window=sweep.window,
                             mean_tol=sweep.mean_tol)
    rows = []
    for t_obs in sweep.observation_times:
        if t_fail is not None and t_obs > traj.t[-1]:
            rows.append(OccupancyRow(v0=v0, t_obs=t_obs, energy_at_t=float("nan"),
                                     settled_level=None, settled_energy=None,
                                     failed=True))
            continue
        i = int(np.searchsorted(traj.t, t_obs))
        if i >= len(traj) or traj.t[i] != t_obs:
            i = min(max(i - 1, 0), len(traj) - 1)  # nearest recorded sample at or before t_obs
        plat = next((p for p in plats if p.t_first <= t_obs <= p.t_last), None)
        rows.append(OccupancyRow(
            v0=v0, t_obs=t_obs, energy_at_t=float(traj.e[i]),
            settled_level=plat.level if plat else None,
            settled_energy=plat.settled_energy if plat else None))
    return rows


def occupancy_sweep(sweep: SweepConfig, jobs: int = 1) -> list[OccupancyRow]:
    """One row per (v0, observation time), grouped by v0 in grid order.

    A member that fails numerically yields rows flagged failed; the rest
    of the sweep continues.
    """
    chunks = map_ordered(lambda v0: _occupancy_one(v0, sweep), sweep.v0_grid, jobs)
    return [row for chunk in chunks for row in chunk]


def first_settle(sweep_rows: Iterable[OccupancyRow]) -> Optional[OccupancyRow]:
    """Earliest observed settled row of one v0 group, or None."""
    for row in sweep_rows:
        if row.settled_level is not None:
            return row
    return None


def staircase(v0: float, t_max: float, params: ModelParams,
              integrator: IntegratorConfig) -> tuple[Trajectory, list[TransitionEvent]]:
    """Energy history from (q=0, v=v0) plus its transition decomposition."""
    cfg = IntegratorConfig(dt=integrator.dt, t_max=t_max,
                           sample_stride=integrator.sample_stride)
    traj = integrate(OscillatorState(t=0.0, q=0.0, v=v0), cfg, params)
    return traj, extract_transitions(traj)


def staircase_plateaus(traj: Trajectory) -> list[Plateau]:
    """Settled plateaus of a staircase trajectory (default segmentation)."""
    return segment_plateaus(traj)


def lifetime_stats(level_targets: Sequence[Level], ensemble_size: int, seed: int,
                   params: ModelParams, integrator: IntegratorConfig,
                   exit_threshold: float = 0.1, confirm_depth: float = 0.4,
                   jobs: int = 1) -> list[LifetimeStat]:
    """Plateau lifetimes for ensembles prepared on each target level.

    Each member starts at the exact level energy (q=0, v=sqrt(2*E_n)) with
    a seeded random drive phase and runs until confirmed departure or the
    integrator's t_max (censored). The drive phase is the only randomized
    quantity.
    """
    if ensemble_size < 1:
        raise ValueError(f"ensemble_size must be >= 1, got {ensemble_size}")
    rng = np.random.default_rng(seed)
    stats: list[LifetimeStat] = []
    for level in level_targets:
        phases = rng.uniform(0.0, 2.0 * math.pi, ensemble_size)
        en = level.energy

        def one(phi: float, en: float = en) -> float:
            return float(_kernels.depart_time(
                0.0, math.sqrt(2.0 * en), phi, en, integrator.dt,
                integrator.t_max, params.k, params.a0, params.omega_d,
                params.eps_den, exit_threshold, confirm_depth))

        times = map_ordered(one, list(phases), jobs)
        alive = [t for t in times if t > 0.0]
        censored = len(times) - len(alive)
        if alive:
            mean = float(np.mean(alive))
            std = float(np.std(alive))
        else:
            mean = std = float("nan")
        stats.append(LifetimeStat(level=level, mean_lifetime=mean, std_lifetime=std,
                                  sample_count=len(alive), censored_count=censored))
    return stats


def predicted_uncertainty_product(level: Level, params: ModelParams) -> float:
    """Closed-form product 2*E_n / (gamma0 * (2*E_n - 1)), gamma0 = k*pi^2/2.

    Obtained by linearizing the friction near the level (sin^2(pi*xi)
    ~ (pi*xi)^2), replacing v^2 by its period average E_n and integrating
    d(xi)/dt = C*xi^2. Rejects the ground level, which has no downward
    escape.
    """
    if level.n < 1:
        raise ValueError("the ground level has no downward escape")
    gamma0 = params.k * math.pi * math.pi / 2.0
    if gamma0 <= 0:
        raise ValueError("predicted product requires k > 0")
    en = level.energy
    return 2.0 * en / (gamma0 * (2.0 * en - 1.0))


def uncertainty_scan(level: Level, delta_e_list: Sequence[float], params: ModelParams,
                     integrator: IntegratorConfig, escape_depth: float = 0.4,
                     t_budget: float = 1e4) -> list[UncertaintyRecord]:
    """Escape times for initial disturbances delta_e below level energy.

    Starts undriven at q=0, v=sqrt(2*(E_n - delta_e)) and measures the
    time for E to first reach E_n - escape_depth. Requires a0 = 0 and
    every delta_e in (0, escape_depth).
    """
    if level.n < 1:
        raise ValueError("uncertainty scan needs an excited level (n >= 1)")
    if params.a0 != 0.0:
        raise ValueError("uncertainty scan requires undriven dynamics (a0 = 0)")
    for de in delta_e_list:
        if not (0.0 < de < escape_depth):
            raise ValueError(
                f"delta_e must lie in (0, {escape_depth}), got {de}")
    en = level.energy
    predicted = predicted_uncertainty_product(level, params)
    records = []
    for de in delta_e_list:
        v0 = math.sqrt(2.0 * (en - de))
        dt_esc = float(_kernels.time_to_reach(0.0, v0, integrator.dt,
                                              en - escape_depth, t_budget,
                                              params.k, params.eps_den))
        if dt_esc < 0:
            raise RuntimeError(
                f"no escape within t_budget={t_budget} for delta_e={de}")
        records.append(UncertaintyRecord(level=level, delta_e=de, delta_t=dt_esc,
                                         product=de * dt_esc, predicted=predicted))
    return records
