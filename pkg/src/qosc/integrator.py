"""Fixed-step integration, trajectory recording and level-event detection.

The solver is the classic explicit fourth-order Runge-Kutta scheme at a
fixed step (default 1e-3). Fixed stepping keeps every run bit-reproducible,
which the sweep and CLI layers rely on; adaptive stepping would trade that
away for speed we do not need.

Two detection regimes live here:

* detect_settle is the strict criterion: energy inside a narrow band
  (eps_settle, default 1e-3) around one level for a full window. It is the
  right tool for undriven decay, which approaches a level asymptotically.
* segment_plateaus is the jitter-tolerant segmentation used for driven
  runs, where the drive makes E oscillate around a level with excursions far
  larger than eps_settle (amplitude ~0.14 at E=2.5 under the default
  drive). A plateau is a stretch of samples near one level that contains
  at least one window whose mean energy sits within mean_tol of the level;
  the window-mean test rejects transits that merely pass through a band.

extract_transitions pairs adjacent plateaus into TransitionEvents, with
leave/arrive times measured against exit_threshold, the tighter band that
separates genuine departure from jitter.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .core import MAX_LEVEL, Level, ModelParams, OscillatorState

__all__ = [
    "IntegratorConfig",
    "Trajectory",
    "SettleEvent",
    "TransitionEvent",
    "Plateau",
    "NumericalFailure",
    "step",
    "integrate",
    "integrate_partial",
    "detect_settle",
    "segment_plateaus",
    "extract_transitions",
]


class NumericalFailure(RuntimeError):
    """Integration produced a non-finite state."""

    def __init__(self, t_fail: float):
        super().__init__(f"non-finite state at t = {t_fail}")
        self.t_fail = t_fail


@dataclass(frozen=True)
class IntegratorConfig:
    """Step size, absolute end time and recording stride.

    t_max = state0.t (zero for the usual t0 = 0) yields the single-sample
    trajectory holding only the initial state.
    """

    dt: float = 1e-3
    t_max: float = 100.0
    sample_stride: int = 10

    def __post_init__(self) -> None:
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not (math.isfinite(self.t_max) and self.t_max >= 0):
            raise ValueError(f"t_max must be >= 0, got {self.t_max}")
        if not isinstance(self.sample_stride, int) or self.sample_stride < 1:
            raise ValueError(f"sample_stride must be an integer >= 1, got {self.sample_stride}")


class Trajectory:
    """Recorded (t, q, v, E) samples as parallel numpy arrays."""

    def __init__(self, t: np.ndarray, q: np.ndarray, v: np.ndarray):
        t = np.asarray(t, dtype=float)
        q = np.asarray(q, dtype=float)
        v = np.asarray(v, dtype=float)
        if not (t.shape == q.shape == v.shape) or t.ndim != 1 or t.size == 0:
            raise ValueError("t, q, v must be equal-length nonempty 1-d arrays")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("sample times must be strictly increasing")
        self.t = t
        self.q = q
        self.v = v
        self.e = 0.5 * (v * v + q * q)

    def __len__(self) -> int:
        return self.t.size

    def state_at(self, i: int) -> OscillatorState:
        return OscillatorState(t=float(self.t[i]), q=float(self.q[i]), v=float(self.v[i]))

    def to_csv(self, path: str) -> None:
        """Write header t,q,v,E and one row per sample at 17 significant digits."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("t,q,v,E\n")
            for i in range(self.t.size):
                fh.write("%.17g,%.17g,%.17g,%.17g\n"
                         % (self.t[i], self.q[i], self.v[i], self.e[i]))


@dataclass(frozen=True)
class SettleEvent:
    level: Level
    t_settle: float


@dataclass(frozen=True)
class TransitionEvent:
    from_level: Level
    to_level: Level
    t_leave: float
    t_arrive: float

    def __post_init__(self) -> None:
        if self.t_arrive <= self.t_leave:
            raise ValueError("t_arrive must exceed t_leave")
        if self.from_level.n == self.to_level.n:
            raise ValueError("transition requires distinct levels")

    @property
    def duration(self) -> float:
        return self.t_arrive - self.t_leave


@dataclass(frozen=True)
class Plateau:
    """A settled stretch of a trajectory at one level.

    settled_energy is the mean of the first qualifying window, so it is
    within mean_tol of the level energy by construction.
    """

    level: Level
    t_first: float
    t_settle: float
    t_last: float
    settled_energy: float
    i_first: int
    i_last: int


def step(state: OscillatorState, config: IntegratorConfig, params: ModelParams) -> OscillatorState:
    """Advance one RK4 step of config.dt."""
    q, v = _kernels.rk4_step(state.t, state.q, state.v, config.dt,
                             params.k, params.a0, params.omega_d,
                             params.phi_d, params.eps_den)
    if not (math.isfinite(q) and math.isfinite(v)):
        raise NumericalFailure(state.t + config.dt)
    return OscillatorState(t=state.t + config.dt, q=float(q), v=float(v))


def integrate_partial(state0: OscillatorState, config: IntegratorConfig,
                      params: ModelParams) -> tuple[Trajectory, Optional[float]]:
    """Like integrate, but on numerical failure returns the samples
    recorded so far together with the failure time instead of raising."""
    if config.t_max < state0.t:
        raise ValueError(f"t_max ({config.t_max}) precedes the initial time ({state0.t})")
    n_steps = int(round((config.t_max - state0.t) / config.dt))
    ts, qs, vs, t_fail = _kernels.integrate_record(
        state0.q, state0.v, state0.t, config.dt, n_steps, config.sample_stride,
        params.k, params.a0, params.omega_d, params.phi_d, params.eps_den)
    return Trajectory(ts, qs, vs), (None if math.isnan(t_fail) else float(t_fail))


def integrate(state0: OscillatorState, config: IntegratorConfig, params: ModelParams) -> Trajectory:
    """Integrate from state0 to t = config.t_max, recording every
    sample_stride-th step plus both endpoints."""
    traj, t_fail = integrate_partial(state0, config, params)
    if t_fail is not None:
        raise NumericalFailure(t_fail)
    return traj


def _level_indices(e: np.ndarray) -> np.ndarray:
    """Nearest level index per sample; overflown samples clamp harmlessly
    (their band membership is decided against the original energies)."""
    capped = np.clip(np.nan_to_num(e, nan=0.0, posinf=float(MAX_LEVEL),
                                   neginf=0.0), 0.0, float(MAX_LEVEL))
    return np.maximum(np.rint(capped - 0.5).astype(np.int64), 0)


def detect_settle(traj: Trajectory, eps_settle: float = 1e-3,
                  window: float = 50.0) -> Optional[SettleEvent]:
    """First time a full window of samples stays within eps_settle of one level.

    Returns the SettleEvent whose t_settle is the sample completing the
    window, or None if no window qualifies.
    """
    if window <= 0:
        raise ValueError(f"window must be > 0, got {window}")
    lev = _level_indices(traj.e)
    ok = np.isfinite(traj.e) & (np.abs(traj.e - (lev + 0.5)) <= eps_settle)
    i0 = -1
    for i in range(len(traj)):
        if not ok[i]:
            i0 = -1
            continue
        if i0 < 0 or lev[i] != lev[i0]:
            i0 = i
        if traj.t[i] - traj.t[i0] >= window:
            return SettleEvent(level=Level(int(lev[i])), t_settle=float(traj.t[i]))
    return None


def segment_plateaus(traj: Trajectory, band: float = 0.25, window: float = 5.0,
                     mean_tol: float = 0.05) -> list[Plateau]:
    """Split a (possibly driven) trajectory into settled plateaus.

    Membership uses the wide band around the nearest level; a segment stays
    open across out-of-band jitter and closes only when a sample enters a
    different level's band. A segment qualifies as a plateau once it has a
    sliding window of span >= window whose sample mean lies within mean_tol
    of the level energy; segments without one (transits) are dropped.
    """
    e = traj.e
    t = traj.t
    n_idx = _level_indices(e)
    in_band = np.isfinite(e) & (np.abs(e - (n_idx + 0.5)) <= band)
    segs: list[list[int]] = []
    cur: Optional[list[int]] = None
    for i in np.flatnonzero(in_band):
        if cur is None or n_idx[i] != cur[0]:
            if cur is not None:
                segs.append(cur)
            cur = [int(n_idx[i]), int(i), int(i)]
        else:
            cur[2] = int(i)
    if cur is not None:
        segs.append(cur)

    out: list[Plateau] = []
    for n, i0, i1 in segs:
        en = n + 0.5
        j0, j1 = i0, i0
        hit = None
        while j0 <= i1:
            while j1 <= i1 and t[j1] - t[j0] < window:
                j1 += 1
            if j1 > i1:
                break
            m = float(e[j0:j1 + 1].mean())
            if abs(m - en) <= mean_tol:
                hit = (float(t[j1]), m)
                break
            j0 += 1
        if hit is None:
            continue
        out.append(Plateau(level=Level(n), t_first=float(t[i0]), t_settle=hit[0],
                           t_last=float(t[i1]), settled_energy=hit[1],
                           i_first=i0, i_last=i1))
    return out


def extract_transitions(traj: Trajectory, exit_threshold: float = 0.1,
                        band: float = 0.25, window: float = 5.0,
                        mean_tol: float = 0.05) -> list[TransitionEvent]:
    """Transition events between each adjacent pair of settled plateaus.

    t_leave is the last sample of the earlier plateau within exit_threshold
    of its level; t_arrive is the first sample of the later plateau within
    exit_threshold of its level.
    """
    plats = segment_plateaus(traj, band=band, window=window, mean_tol=mean_tol)
    events: list[TransitionEvent] = []
    for a, b in zip(plats, plats[1:]):
        ea, eb = a.level.energy, b.level.energy
        sa = slice(a.i_first, a.i_last + 1)
        sb = slice(b.i_first, b.i_last + 1)
        near_a = np.flatnonzero(np.abs(traj.e[sa] - ea) <= exit_threshold)
        near_b = np.flatnonzero(np.abs(traj.e[sb] - eb) <= exit_threshold)
        if near_a.size == 0 or near_b.size == 0:
            continue
        t_leave = float(traj.t[a.i_first + near_a[-1]])
        t_arrive = float(traj.t[b.i_first + near_b[0]])
        events.append(TransitionEvent(from_level=a.level, to_level=b.level,
                                      t_leave=t_leave, t_arrive=t_arrive))
    return events
