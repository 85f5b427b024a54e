"""Electron-oscillator scattering: the Franck-Hertz style experiment.

One scattering event is: a free electron with kinetic energy t0 hits an
oscillator sitting on its ground orbit at phase phi (q = sin phi,
v = cos phi), the two exchange velocity in an instantaneous 1-d elastic
collision, the oscillator relaxes undriven to its first settled level, and
whatever energy it sheds on the way down is re-absorbed by the electron.
The electron's final kinetic energy is therefore

    t_final = (post-collision kinetic) + (e1 - e_settled)

with e1 the oscillator energy right after impact. Below the first
excitation gap every borrowed quantum comes back and scattering is exactly
elastic; above it the oscillator strands one or more whole level spacings,
so inelastic losses are quantized. An oscillator kicked below its ground
energy pumps back up to it, and by default that deficit is charged to the
electron too (pump_from_electron), which keeps the event energy-conserving.

Relaxation endpoints are detected one-sidedly (the undriven flow is
monotone and cannot cross levels): from above within settle_tol, and for
states parked a rounding error below a level, by lingering within
settle_eps_below for settle_window time units. Settled energies snap to
the exact half-integer, which is also the relaxation asymptote.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from . import _kernels
from .core import ModelParams, OscillatorState
from .experiments import map_ordered

__all__ = [
    "ElectronState",
    "CollisionConfig",
    "ScatterResult",
    "FHCurvePoint",
    "collide",
    "scatter_once",
    "scatter_ensemble",
    "fh_curve",
]

#: |t_final - t0| at or below this counts as elastic (settling tolerance).
ELASTIC_TOL = 1e-3


@dataclass(frozen=True)
class ElectronState:
    """Free electron in the same nondimensional units as the oscillator."""

    u: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.u):
            raise ValueError(f"electron velocity must be finite, got {self.u!r}")

    @property
    def kinetic(self) -> float:
        return 0.5 * self.u * self.u


@dataclass(frozen=True)
class CollisionConfig:
    """Mass ratio, phase grid and relaxation/settling knobs."""

    mass_ratio: float = 1.0
    n_phases: int = 64
    relax_t_max: float = 1e4
    settle_tol: float = 0.05
    settle_eps_below: float = 1e-3
    settle_window: float = 50.0
    pump_from_electron: bool = True
    dt: float = 1e-3

    def __post_init__(self) -> None:
        if not (math.isfinite(self.mass_ratio) and self.mass_ratio > 0):
            raise ValueError(f"mass_ratio must be > 0, got {self.mass_ratio}")
        if not isinstance(self.n_phases, int) or self.n_phases < 1:
            raise ValueError(f"n_phases must be an integer >= 1, got {self.n_phases}")
        if self.relax_t_max <= 0 or self.dt <= 0:
            raise ValueError("relax_t_max and dt must be > 0")
        if self.settle_tol <= 0 or self.settle_eps_below <= 0 or self.settle_window <= 0:
            raise ValueError("settling parameters must be > 0")


@dataclass(frozen=True)
class ScatterResult:
    """Outcome of a single collision phase.

    settled is False when relaxation exhausted its budget; such results
    carry NaN bookkeeping fields and are excluded from ensemble means.
    """

    t0: float
    phase: float
    e1: float
    e_settled: float
    t_final: float
    elastic: bool
    settled: bool = True


@dataclass(frozen=True)
class FHCurvePoint:
    t0: float
    mean_final_energy: float
    mean_final_speed: float
    n_phases: int
    non_settled_count: int


def collide(u: float, osc: OscillatorState, r: float) -> tuple[float, OscillatorState]:
    """Instantaneous 1-d elastic collision; r is electron/oscillator mass.

    Position and time are unchanged; momentum r*u + v and kinetic energy
    r*u^2/2 + v^2/2 are conserved exactly.
    """
    if not math.isfinite(u):
        raise ValueError(f"electron velocity must be finite, got {u!r}")
    if not (math.isfinite(r) and r > 0):
        raise ValueError(f"mass ratio must be > 0, got {r!r}")
    u_new = ((r - 1.0) * u + 2.0 * osc.v) / (r + 1.0)
    v_new = ((1.0 - r) * osc.v + 2.0 * r * u) / (r + 1.0)
    return u_new, OscillatorState(t=osc.t, q=osc.q, v=v_new)


def scatter_once(t0: float, phase: float, config: CollisionConfig,
                 params: ModelParams) -> ScatterResult:
    """One full scattering event at collision phase phase.

    The oscillator is prepared on the ground orbit (q = sin phase,
    v = cos phase); the drive plays no role here, relaxation is always
    undriven (params supplies k and eps_den only).
    """
    if not (math.isfinite(t0) and t0 > 0):
        raise ValueError(f"t0 must be > 0, got {t0!r}")
    osc = OscillatorState(t=0.0, q=math.sin(phase), v=math.cos(phase))
    u = math.sqrt(2.0 * t0)
    u1, osc1 = collide(u, osc, config.mass_ratio)
    e1 = 0.5 * (osc1.v * osc1.v + osc1.q * osc1.q)
    n, _t_rel = _kernels.relax_settle(osc1.q, osc1.v, config.dt, config.relax_t_max,
                                      params.k, params.eps_den, config.settle_tol,
                                      config.settle_eps_below, config.settle_window)
    if n < 0:
        return ScatterResult(t0=t0, phase=phase, e1=e1, e_settled=float("nan"),
                             t_final=float("nan"), elastic=False, settled=False)
    e_settled = n + 0.5
    emitted = e1 - e_settled
    if emitted < 0.0 and not config.pump_from_electron:
        emitted = 0.0
    t_final = max(0.0, 0.5 * u1 * u1 + emitted)
    return ScatterResult(t0=t0, phase=phase, e1=e1, e_settled=e_settled,
                         t_final=t_final, elastic=abs(t_final - t0) <= ELASTIC_TOL)


def scatter_ensemble(t0: float, config: CollisionConfig,
                     params: ModelParams) -> FHCurvePoint:
    """Phase-averaged outcome over the uniform grid phi_j = 2*pi*j/n_phases.

    Means run over settled events only, in grid order; non-settled events
    are counted. With every event non-settled the means are NaN.
    """
    sum_e = 0.0
    sum_s = 0.0
    n_ok = 0
    n_bad = 0
    for j in range(config.n_phases):
        phase = 2.0 * math.pi * j / config.n_phases
        res = scatter_once(t0, phase, config, params)
        if not res.settled:
            n_bad += 1
            continue
        sum_e += res.t_final
        sum_s += math.sqrt(2.0 * res.t_final)
        n_ok += 1
    if n_ok == 0:
        return FHCurvePoint(t0=t0, mean_final_energy=float("nan"),
                            mean_final_speed=float("nan"),
                            n_phases=config.n_phases, non_settled_count=n_bad)
    return FHCurvePoint(t0=t0, mean_final_energy=sum_e / n_ok,
                        mean_final_speed=sum_s / n_ok,
                        n_phases=config.n_phases, non_settled_count=n_bad)


def fh_curve(t0_grid: Sequence[float], config: CollisionConfig,
             params: ModelParams, jobs: int = 1) -> list[FHCurvePoint]:
    """One FHCurvePoint per grid energy, in input order."""
    if len(t0_grid) == 0:
        raise ValueError("t0_grid must be nonempty")
    for t0 in t0_grid:
        if not (math.isfinite(t0) and t0 > 0):
            raise ValueError(f"t0 grid values must be > 0, got {t0!r}")
    return map_ordered(lambda t0: scatter_ensemble(t0, config, params),
                       list(t0_grid), jobs)
