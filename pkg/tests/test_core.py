"""Pointwise contracts of the model's right-hand side and level structure."""
import math

import numpy as np
import pytest

from qosc.core import (MAX_LEVEL, GeneralFrictionSpec, Level, ModelParams,
                       OscillatorState, acceleration, drive, energy,
                       energy_rate, friction_term, mu_general, nearest_level)

UNDRIVEN = ModelParams(a0=0.0)
DRIVEN = ModelParams()


def state(q: float, v: float, t: float = 0.0) -> OscillatorState:
    return OscillatorState(t=t, q=q, v=v)


class TestEnergy:
    def test_ground_kinetic(self):
        assert energy(state(0.0, 1.0)) == 0.5

    def test_ground_potential(self):
        assert energy(state(1.0, 0.0)) == 0.5

    def test_pure_kinetic_v2(self):
        assert energy(state(0.0, 2.0)) == 2.0

    def test_nonnegative_on_grid(self):
        for q in np.linspace(-3, 3, 13):
            for v in np.linspace(-3, 3, 13):
                assert energy(state(q, v)) >= 0.0


class TestDrive:
    def test_zero_phase_at_origin(self):
        assert drive(0.0, DRIVEN) == 0.0

    def test_zero_amplitude(self):
        p = ModelParams(a0=0.0)
        for t in (0.0, 0.3, 17.0, 1e4):
            assert drive(t, p) == 0.0

    def test_peak_value(self):
        # omega_d * t = pi/2 puts the sine at 1
        assert drive(math.pi / 4, DRIVEN) == pytest.approx(0.05, rel=1e-12)


class TestFrictionTerm:
    def test_zero_at_levels(self):
        # s = 2n+1 makes cos^2(pi*s/2) vanish up to rounding of sqrt
        for n in range(21):
            v = math.sqrt(2 * n + 1)
            assert abs(friction_term(state(0.0, v), UNDRIVEN)) <= 1e-25

    def test_zero_velocity_factor(self):
        for k in (0.1, 0.2, 1.0):
            p = ModelParams(k=k, a0=0.0)
            assert friction_term(state(1.0, 0.0), p) == 0.0

    def test_hand_value_between_levels(self):
        # s = 2, cos^2(pi) = 1: -k*v*(s-1)/s^2 = -0.2*sqrt(2)/4
        got = friction_term(state(0.0, math.sqrt(2.0)), UNDRIVEN)
        assert got == pytest.approx(-0.2 * math.sqrt(2.0) / 4.0, rel=1e-12)
        assert got == pytest.approx(-0.070711, abs=5e-7)

    def test_dissipative_above_pumping_below(self):
        above = friction_term(state(0.0, math.sqrt(2.0)), UNDRIVEN)   # E = 1
        below = friction_term(state(0.0, math.sqrt(0.4)), UNDRIVEN)   # E = 0.2
        assert above * math.sqrt(2.0) < 0   # opposes motion
        assert below * math.sqrt(0.4) > 0   # feeds motion


class TestAcceleration:
    def test_pure_restoring_at_levels(self):
        assert acceleration(state(1.0, 0.0), UNDRIVEN) == -1.0

    def test_friction_only_at_q_zero(self):
        st = state(0.0, math.sqrt(2.0))
        assert acceleration(st, UNDRIVEN) == pytest.approx(
            friction_term(st, UNDRIVEN), abs=1e-15)
        assert acceleration(st, UNDRIVEN) == pytest.approx(-0.070711, abs=5e-7)

    def test_drive_contribution(self):
        st = state(0.0, 1.0, t=math.pi / 4)
        assert acceleration(st, DRIVEN) - acceleration(st, UNDRIVEN) == pytest.approx(
            0.05, rel=1e-12)


class TestEnergyRate:
    def test_zero_at_levels(self):
        for n in range(6):
            v = math.sqrt(2 * n + 1)
            assert abs(energy_rate(state(0.0, v), UNDRIVEN)) <= 1e-25

    def test_sign_on_grid(self):
        # dissipative above the ground energy, pumping below, undriven
        for q in np.linspace(-2.5, 2.5, 21):
            for v in np.linspace(-2.5, 2.5, 21):
                e = 0.5 * (q * q + v * v)
                rate = energy_rate(state(q, v), UNDRIVEN)
                if e >= 0.5:
                    assert rate <= 1e-30
                else:
                    assert rate >= -1e-30

    def test_identity_with_acceleration(self):
        # dE/dt = v*(qddot + q); cancellation grows with |q||v|, so stay at
        # moderate energies for the 1e-15 pointwise bound
        rng = np.random.default_rng(7)
        for _ in range(200):
            q, v = rng.uniform(-1.4, 1.4, 2)
            t = rng.uniform(0.0, 20.0)
            st = state(q, v, t)
            for p in (UNDRIVEN, DRIVEN):
                lhs = energy_rate(st, p)
                rhs = v * (acceleration(st, p) + q)
                assert lhs == pytest.approx(rhs, abs=1e-15)


class TestNearestLevel:
    def test_examples(self):
        assert nearest_level(0.6).n == 0
        assert nearest_level(2.49).n == 2
        assert nearest_level(1.0).n == 0   # midpoint resolves downward

    def test_edges(self):
        assert nearest_level(0.0).n == 0
        assert nearest_level(0.5).n == 0
        assert nearest_level(1.5).n == 1
        assert nearest_level(2.0).n == 1   # midpoint again

    def test_cap(self):
        assert nearest_level(10.0**7).n == MAX_LEVEL

    def test_rejections(self):
        with pytest.raises(ValueError):
            nearest_level(-0.1)
        with pytest.raises(ValueError):
            nearest_level(float("nan"))

    def test_idempotent(self):
        for e in np.linspace(0.0, 25.0, 401):
            n = nearest_level(float(e)).n
            assert nearest_level(Level(n).energy).n == n

    def test_monotone(self):
        ns = [nearest_level(float(e)).n for e in np.linspace(0.0, 25.0, 2001)]
        assert all(b >= a for a, b in zip(ns, ns[1:]))


class TestMuGeneral:
    SPEC = GeneralFrictionSpec(a=1.0)

    def test_ground_zero_exact(self):
        assert mu_general(0.5, self.SPEC) == 0.0

    def test_excited_zero(self):
        assert abs(mu_general(1.5, self.SPEC)) <= 1e-25

    def test_hand_value(self):
        assert mu_general(1.0, self.SPEC) == 0.5

    def test_sign_pattern(self):
        for j in np.linspace(0.01, 0.49, 49):
            assert mu_general(float(j), self.SPEC) < 0.0
        for j in np.linspace(0.5, 20.5, 2001):
            assert mu_general(float(j), self.SPEC) >= -1e-25

    def test_zero_set_is_half_integers(self):
        # zeros at every half-integer on [0, 20.5]; nothing else within 1e-3
        for n in range(21):
            assert abs(mu_general(n + 0.5, self.SPEC)) <= 1e-25
        for j in np.linspace(0.0, 20.5, 8201):
            d = abs((j - 0.5) - round(j - 0.5))
            if d > 1e-3:
                assert abs(mu_general(float(j), self.SPEC)) > 1e-10

    def test_rejections(self):
        with pytest.raises(ValueError):
            mu_general(-1.0, self.SPEC)
        with pytest.raises(ValueError):
            GeneralFrictionSpec(a=0.0)
        with pytest.raises(ValueError):
            GeneralFrictionSpec(a=-1.0)


class TestValidation:
    def test_state_rejects_nonfinite(self):
        for bad in (float("nan"), float("inf"), -float("inf")):
            with pytest.raises(ValueError):
                OscillatorState(t=0.0, q=bad, v=0.0)
            with pytest.raises(ValueError):
                OscillatorState(t=0.0, q=0.0, v=bad)
            with pytest.raises(ValueError):
                OscillatorState(t=bad, q=0.0, v=0.0)

    def test_params_rejections(self):
        with pytest.raises(ValueError):
            ModelParams(k=-0.1)
        with pytest.raises(ValueError):
            ModelParams(a0=-0.05)
        with pytest.raises(ValueError):
            ModelParams(omega_d=0.0)
        with pytest.raises(ValueError):
            ModelParams(eps_den=0.0)
        with pytest.raises(ValueError):
            ModelParams(k=float("nan"))

    def test_level_contract(self):
        assert Level(0).energy == 0.5
        assert Level(3).energy == 3.5
        assert Level(3).action == Level(3).energy
        with pytest.raises(ValueError):
            Level(-1)
        with pytest.raises(ValueError):
            Level(MAX_LEVEL + 1)
        with pytest.raises(ValueError):
            Level(2.0)
        with pytest.raises(ValueError):
            Level(True)
