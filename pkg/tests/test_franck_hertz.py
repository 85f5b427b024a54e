"""Collision algebra, scattering bookkeeping and phase-averaged curves."""
import math

import numpy as np
import pytest

from qosc.core import ModelParams, OscillatorState
from qosc.franck_hertz import (ELASTIC_TOL, CollisionConfig, ElectronState,
                               collide, fh_curve, scatter_ensemble,
                               scatter_once)

UNDRIVEN = ModelParams(a0=0.0)
DEFAULT = CollisionConfig()


def osc(q: float, v: float) -> OscillatorState:
    return OscillatorState(t=0.0, q=q, v=v)


class TestCollide:
    def test_equal_mass_exchange(self):
        u2, o2 = collide(1.5, osc(0.0, 0.0), 1.0)
        assert u2 == 0.0 and o2.v == 1.5

    def test_equal_mass_exchange_opposite(self):
        u2, o2 = collide(0.0, osc(0.0, -1.0), 1.0)
        assert u2 == -1.0 and o2.v == 0.0

    def test_position_and_time_unchanged(self):
        _, o2 = collide(2.0, osc(0.7, -0.3), 0.5)
        assert o2.q == 0.7 and o2.t == 0.0

    def test_conservation_over_mass_ratios(self):
        rng = np.random.default_rng(11)
        for r in (0.1, 0.5, 1.0, 2.0, 10.0):
            for _ in range(40):
                u, v = rng.uniform(-2.0, 2.0, 2)
                u2, o2 = collide(u, osc(0.0, v), r)
                assert r * u + v == pytest.approx(r * u2 + o2.v, abs=1e-14)
                assert r * u * u / 2 + v * v / 2 == pytest.approx(
                    r * u2 * u2 / 2 + o2.v * o2.v / 2, abs=1e-14)

    def test_rejections(self):
        with pytest.raises(ValueError):
            collide(float("nan"), osc(0.0, 0.0), 1.0)
        with pytest.raises(ValueError):
            collide(1.0, osc(0.0, 0.0), 0.0)
        with pytest.raises(ValueError):
            collide(1.0, osc(0.0, 0.0), -1.0)


class TestElectronState:
    def test_kinetic(self):
        assert ElectronState(u=2.0).kinetic == 2.0
        assert ElectronState(u=-1.0).kinetic == 0.5

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            ElectronState(u=float("inf"))


class TestCollisionConfig:
    def test_rejections(self):
        with pytest.raises(ValueError):
            CollisionConfig(mass_ratio=0.0)
        with pytest.raises(ValueError):
            CollisionConfig(n_phases=0)
        with pytest.raises(ValueError):
            CollisionConfig(relax_t_max=0.0)
        with pytest.raises(ValueError):
            CollisionConfig(settle_tol=-1.0)


class TestScatterOnce:
    def test_sub_threshold_elastic(self):
        # e1 = 1.4 < 1.5: the borrowed energy comes back in full
        res = scatter_once(1.4, 0.0, DEFAULT, UNDRIVEN)
        assert res.settled and res.elastic
        assert res.e1 == pytest.approx(1.4, abs=1e-12)
        assert res.e_settled == 0.5
        assert res.t_final == pytest.approx(1.4, abs=1e-9)

    def test_one_quantum_loss(self):
        # e1 = (2.8 + 1)/2 = 1.9: strands one level spacing
        res = scatter_once(1.4, math.pi / 2, DEFAULT, UNDRIVEN)
        assert res.settled and not res.elastic
        assert res.e1 == pytest.approx(1.9, abs=1e-12)
        assert res.e_settled == 1.5
        assert res.t_final == pytest.approx(0.4, abs=1e-9)

    def test_noop_collision(self):
        # v(0) = 1 equals u = sqrt(2*0.5): the exchange changes nothing
        res = scatter_once(0.5, 0.0, DEFAULT, UNDRIVEN)
        assert res.t_final == 0.5
        assert res.elastic and res.settled

    def test_pump_charges_electron_by_default(self):
        # phi = 0 and t0 < 0.5 kicks the oscillator below ground; pumping
        # back up is billed to the electron, restoring exact elasticity
        res = scatter_once(0.4, 0.0, DEFAULT, UNDRIVEN)
        assert res.e1 == pytest.approx(0.4, abs=1e-12)
        assert res.e_settled == 0.5
        assert res.t_final == pytest.approx(0.4, abs=1e-9)
        assert res.elastic

    def test_pump_flag_off_keeps_windfall(self):
        cfg = CollisionConfig(pump_from_electron=False)
        res = scatter_once(0.4, 0.0, cfg, UNDRIVEN)
        assert res.t_final == pytest.approx(0.5, abs=1e-9)
        assert not res.elastic

    def test_budget_exhaustion_reported(self):
        cfg = CollisionConfig(relax_t_max=1.0)
        res = scatter_once(1.7, math.pi / 2, cfg, UNDRIVEN)
        assert not res.settled
        assert math.isnan(res.e_settled) and math.isnan(res.t_final)

    def test_rejects_nonpositive_energy(self):
        with pytest.raises(ValueError):
            scatter_once(0.0, 0.0, DEFAULT, UNDRIVEN)


class TestScatterEnsemble:
    def test_elastic_point(self):
        pt = scatter_ensemble(0.5, DEFAULT, UNDRIVEN)
        assert pt.non_settled_count == 0
        assert abs(pt.mean_final_energy - 0.5) <= 0.02 * 0.5
        assert pt.mean_final_speed == pytest.approx(1.0, abs=1e-9)

    def test_first_inelastic_dip(self):
        pt = scatter_ensemble(1.3, DEFAULT, UNDRIVEN)
        assert pt.non_settled_count == 0
        assert pt.mean_final_energy < 1.25

    def test_all_non_settled_gives_nan(self):
        cfg = CollisionConfig(n_phases=8, relax_t_max=1.0)
        pt = scatter_ensemble(1.7, cfg, UNDRIVEN)
        assert pt.non_settled_count == 8
        assert math.isnan(pt.mean_final_energy)
        assert math.isnan(pt.mean_final_speed)


class TestFHCurve:
    def test_elastic_band_grid(self):
        pts = fh_curve([0.2, 0.4, 0.6, 0.8], DEFAULT, UNDRIVEN)
        for pt in pts:
            assert abs(pt.mean_final_energy - pt.t0) <= 0.02 * pt.t0

    def test_rerise_toward_second_threshold(self):
        # between thresholds every phase loses exactly one quantum, so the
        # mean energy is t0 - 1 and the mean speed climbs monotonically
        grid = [1.5, 1.6, 1.7, 1.8, 1.9]
        pts = fh_curve(grid, DEFAULT, UNDRIVEN)
        speeds = [pt.mean_final_speed for pt in pts]
        for pt in pts:
            assert pt.non_settled_count == 0
            assert pt.mean_final_energy == pytest.approx(pt.t0 - 1.0, abs=1e-9)
            assert pt.mean_final_speed == pytest.approx(
                math.sqrt(2.0 * (pt.t0 - 1.0)), abs=1e-9)
        assert all(b > a for a, b in zip(speeds, speeds[1:]))

    def test_quantized_losses(self):
        for t0 in (1.2, 1.7):
            for j in range(DEFAULT.n_phases):
                phase = 2.0 * math.pi * j / DEFAULT.n_phases
                res = scatter_once(t0, phase, DEFAULT, UNDRIVEN)
                assert res.settled
                loss = t0 - res.t_final
                if abs(loss) > ELASTIC_TOL:
                    assert abs(loss - round(loss)) <= 1e-3
                    assert round(loss) >= 1

    def test_phase_grid_refinement(self):
        # doubling the grid where the integrand has no threshold crossing
        # leaves the mean essentially unchanged
        for t0 in (0.4, 1.5):
            m64 = scatter_ensemble(t0, CollisionConfig(n_phases=64), UNDRIVEN)
            m128 = scatter_ensemble(t0, CollisionConfig(n_phases=128), UNDRIVEN)
            change = abs(m128.mean_final_energy - m64.mean_final_energy)
            assert change < 0.005 * m64.mean_final_energy

    def test_worker_count_does_not_change_points(self):
        cfg = CollisionConfig(n_phases=16)
        assert fh_curve([0.5, 1.2], cfg, UNDRIVEN, jobs=1) == \
            fh_curve([0.5, 1.2], cfg, UNDRIVEN, jobs=2)

    def test_rejections(self):
        with pytest.raises(ValueError):
            fh_curve([], DEFAULT, UNDRIVEN)
        with pytest.raises(ValueError):
            fh_curve([0.5, -1.0], DEFAULT, UNDRIVEN)
