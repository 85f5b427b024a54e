"""State, parameters, level structure and right-hand-side physics.

The model is a nondimensional harmonic oscillator with an action-selective
friction term and an optional sinusoidal drive:

    q'' + q = -k * q' * (s - 1) * cos^2(pi*s/2) / s^2 + a0 * sin(omega_d*t + phi_d)

with s = q'^2 + q^2 = 2E. The friction coefficient vanishes exactly at the
half-integer energies E_n = n + 1/2, is positive (dissipative) above the
ground energy and negative (pumping) below it, so every level is a
stationary orbit: attracting from above, repelling from below, with the
ground level attracting from both sides. Action and energy coincide here
(J = E with unit frequency), which is what makes the level set the
Bohr-Sommerfeld ladder.

All quantities are dimensionless; time is measured in units of the
oscillator period over 2*pi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from ._kernels import rhs_acc

#: Largest representable level index; keeps n + 0.5 exact in a double.
MAX_LEVEL = 10**6


def _require_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class OscillatorState:
    """Instantaneous (t, q, v) of the oscillator, nondimensional."""

    t: float
    q: float
    v: float

    def __post_init__(self) -> None:
        _require_finite("t", self.t)
        _require_finite("q", self.q)
        _require_finite("v", self.v)


@dataclass(frozen=True)
class ModelParams:
    """Friction strength, drive and numerical guard.

    k is the dimensionless friction strength (2*gamma0/pi^2 in terms of
    the underlying damping rate gamma0, recoverable as k*pi^2/2). eps_den
    floors the s^2 denominator of the friction term near the origin; the
    numerator's v factor already kills the term at the exact origin, the
    floor only prevents amplification at s close to 0.
    """

    k: float = 0.2
    a0: float = 0.05
    omega_d: float = 2.0
    phi_d: float = 0.0
    eps_den: float = 1e-6

    def __post_init__(self) -> None:
        for name in ("k", "a0", "omega_d", "phi_d", "eps_den"):
            _require_finite(name, getattr(self, name))
        if self.k < 0:
            raise ValueError(f"k must be >= 0, got {self.k}")
        if self.a0 < 0:
            raise ValueError(f"a0 must be >= 0, got {self.a0}")
        if self.omega_d <= 0:
            raise ValueError(f"omega_d must be > 0, got {self.omega_d}")
        if self.eps_den <= 0:
            raise ValueError(f"eps_den must be > 0, got {self.eps_den}")


@dataclass(frozen=True)
class Level:
    """A stationary level: E_n = n + 1/2, with action equal to energy."""

    n: int

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or isinstance(self.n, bool):
            raise ValueError(f"level index must be an int, got {self.n!r}")
        if self.n < 0 or self.n > MAX_LEVEL:
            raise ValueError(f"level index out of range [0, {MAX_LEVEL}]: {self.n}")

    @property
    def energy(self) -> float:
        return self.n + 0.5

    @property
    def action(self) -> float:
        return self.energy


@dataclass(frozen=True)
class GeneralFrictionSpec:
    """Scale of the general friction law mu(J) = a*(J - 1/2)*cos^2(pi*J)."""

    a: float

    def __post_init__(self) -> None:
        _require_finite("a", self.a)
        if self.a <= 0:
            raise ValueError(f"a must be > 0, got {self.a}")


def energy(state: OscillatorState) -> float:
    """E = (v^2 + q^2) / 2."""
    return 0.5 * (state.v * state.v + state.q * state.q)


def drive(t: float, params: ModelParams) -> float:
    """External forcing a0 * sin(omega_d * t + phi_d)."""
    if params.a0 == 0.0:
        return 0.0
    return params.a0 * math.sin(params.omega_d * t + params.phi_d)


def friction_term(state: OscillatorState, params: ModelParams) -> float:
    """Friction force -k*v*(s-1)*cos^2(pi*s/2)/max(s^2, eps_den), s = 2E."""
    s = state.v * state.v + state.q * state.q
    den = max(s * s, params.eps_den)
    c = math.cos(0.5 * math.pi * s)
    return -params.k * state.v * (s - 1.0) * c * c / den


def acceleration(state: OscillatorState, params: ModelParams) -> float:
    """Full right-hand side: restoring force plus friction plus drive."""
    return float(rhs_acc(state.t, state.q, state.v, params.k, params.a0,
                         params.omega_d, params.phi_d, params.eps_den))


def energy_rate(state: OscillatorState, params: ModelParams) -> float:
    """dE/dt = v * (q'' + q) = v * (friction + drive), exact along solutions."""
    return state.v * (friction_term(state, params) + drive(state.t, params))


def nearest_level(e: float) -> Level:
    """Level minimizing |E - E_n|; midpoints resolve to the lower level."""
    if not math.isfinite(e) or e < 0:
        raise ValueError(f"energy must be finite and >= 0, got {e!r}")
    n = max(0, math.ceil(e - 1.0))
    return Level(min(n, MAX_LEVEL))


def mu_general(j: float, spec: GeneralFrictionSpec) -> float:
    """General friction coefficient a*(J - 1/2)*cos^2(pi*J).

    Negative below J = 1/2, nonnegative above, with zeros exactly on the
    half-integer actions.
    """
    if not math.isfinite(j) or j < 0:
        raise ValueError(f"action must be finite and >= 0, got {j!r}")
    c = math.cos(math.pi * j)
    return spec.a * (j - 0.5) * c * c
