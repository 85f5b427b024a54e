"""Nonlinear classical oscillator with action-selective friction.

A simulation library for a driven, dissipative harmonic oscillator whose
friction coefficient vanishes on the half-integer energy ladder, making
those energies stationary orbits. Includes the experiment drivers (level
occupancy, transition staircase, level lifetimes, energy-time uncertainty,
electron scattering), a small HTTP service exposing them, and a CLI.
"""
from .core import (GeneralFrictionSpec, Level, ModelParams, OscillatorState,
                   acceleration, drive, energy, energy_rate, friction_term,
                   mu_general, nearest_level)
from .integrator import (IntegratorConfig, NumericalFailure, Plateau,
                         SettleEvent, Trajectory, TransitionEvent,
                         detect_settle, extract_transitions, integrate,
                         segment_plateaus, step)
from .experiments import (LifetimeStat, OccupancyRow, SweepConfig,
                          UncertaintyRecord, lifetime_stats, occupancy_sweep,
                          predicted_uncertainty_product, staircase,
                          uncertainty_scan)
from .franck_hertz import (CollisionConfig, ElectronState, FHCurvePoint,
                           ScatterResult, collide, fh_curve, scatter_ensemble,
                           scatter_once)

__version__ = "0.1.0"

__all__ = [
    "CollisionConfig", "ElectronState", "FHCurvePoint", "GeneralFrictionSpec",
    "IntegratorConfig", "Level", "LifetimeStat", "ModelParams",
    "NumericalFailure", "OccupancyRow", "OscillatorState", "Plateau",
    "ScatterResult", "SettleEvent", "SweepConfig", "Trajectory",
    "TransitionEvent", "UncertaintyRecord", "acceleration", "collide",
    "detect_settle", "drive", "energy", "energy_rate", "extract_transitions",
    "fh_curve", "friction_term", "integrate", "lifetime_stats", "mu_general",
    "nearest_level", "occupancy_sweep", "predicted_uncertainty_product",
    "scatter_ensemble", "scatter_once", "segment_plateaus", "staircase",
    "step", "uncertainty_scan", "__version__",
]
