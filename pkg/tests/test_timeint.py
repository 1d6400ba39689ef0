import math

import numpy as np
import pytest

from rswlab.core import DimensionlessParams, Field, Grid1D, LinearState, ScalarWave
from rswlab.errors import ConfigError, NonFinite, NonZeroMean
from rswlab.models import (ModelContext, kdv_nonlinear, kdv_symbol,
                           ostrovsky_symbol, weak_rotation_rhs)
from rswlab.profiles import gaussian_d1, gaussian_d2
from rswlab.timeint import (StepperConfig, ifrk4_step, ifrk4_stepper,
                            integrate, observation_times, rk4_step,
                            rk4_stepper)

from conftest import smooth_field


class TestRK4:
    def test_zero_rhs_keeps_state(self):
        y = np.array([1.0, -2.0, 3.0])
        out = rk4_step(lambda y: 0.0 * y, y, 0.3)
        assert np.array_equal(out, y)

    def test_scalar_decay_oracle(self):
        # hand-computed RK4 update for y' = -y, y0 = 1, dt = 0.1
        out = rk4_step(lambda y: -y, np.array([1.0]), 0.1)
        assert abs(out[0] - 0.9048375) < 1e-15

    def test_harmonic_oscillator_fourth_order(self):
        def rhs(y):
            return np.array([y[1], -y[0]])
        errs = []
        dts = [0.1, 0.05, 0.025]
        for dt in dts:
            y = np.array([1.0, 0.0])
            n = round(1.0 / dt)
            for _ in range(n):
                y = rk4_step(rhs, y, dt)
            errs.append(abs(y[0] - math.cos(1.0)))
        slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
        assert abs(slope - 4.0) < 0.2

    def test_nonfinite_detection(self):
        with np.errstate(divide="ignore"), pytest.raises(NonFinite):
            rk4_step(lambda y: y / 0.0, np.array([1.0]), 0.1)


class TestIFRK4:
    def test_phase_advance_matches_dispersion(self, grid):
        # one plane-wave mode under the rotation-modified symbol travels with
        # the frequency 1/3 derived from the dispersion relation
        k0 = ScalarWave(Field(grid, np.cos(grid.x)))
        dt = 0.37
        out = ifrk4_step(ostrovsky_symbol(grid), lambda f: Field.zeros(grid),
                         k0, dt, require_zero_mean=True)
        assert np.abs(out.k.values - np.cos(grid.x - dt / 3.0)).max() < 1e-12

    def test_exact_for_linear_any_dt(self, grid):
        k0 = ScalarWave(Field(grid, np.cos(grid.x)))
        out = ifrk4_step(kdv_symbol(grid), lambda f: Field.zeros(grid), k0, 5.0)
        assert np.abs(out.k.values - np.cos(grid.x + 5.0 / 6.0)).max() < 1e-12

    def test_l2_conserved_without_nonlinearity(self, grid):
        f = smooth_field(grid, seed=1)
        f = Field(grid, f.values - f.values.mean())
        w = ScalarWave(f)
        before = float((f.values ** 2).sum())
        for _ in range(10):
            w = ifrk4_step(ostrovsky_symbol(grid), lambda f: Field.zeros(grid),
                           w, 0.83, require_zero_mean=True)
        after = float((w.k.values ** 2).sum())
        assert abs(after - before) < 1e-12 * before

    def test_zero_mean_guard(self, grid):
        w = ScalarWave(Field(grid, np.ones(grid.n)))
        with pytest.raises(NonZeroMean):
            ifrk4_step(ostrovsky_symbol(grid), lambda f: Field.zeros(grid), w,
                       0.1, require_zero_mean=True)

    def test_kdv_soliton_transit(self):
        # A sech^2(Bx) with A = 4B^2/3 returns to its shape after crossing
        # the periodic box once at speed c = 2B^2/3
        g = Grid1D(512, 40.0)
        prof = 4.0 / 3.0 / np.cosh(g.x) ** 2
        step = ifrk4_stepper(g, kdv_symbol(g), kdv_nonlinear)
        cfg = StepperConfig(dt=0.125 * g.dx, t_end=40.0 / (2.0 / 3.0), scheme="ifrk4")
        traj = integrate(step, prof, cfg, grid=g)
        assert np.abs(traj.states[-1] - prof).max() < 1e-4

    def test_self_convergence_order_four(self):
        g = Grid1D(256, 40.0)
        k0 = Field(g, gaussian_d2(g.x, 0.5, 1.5)).values
        step = ifrk4_stepper(g, ostrovsky_symbol(g), kdv_nonlinear,
                             require_zero_mean=True)
        finals = []
        for fac in (0.25, 0.125, 0.0625):
            traj = integrate(step, k0, StepperConfig(dt=fac * g.dx, t_end=5.0,
                                                     scheme="ifrk4"), grid=g)
            finals.append(traj.states[-1])
        d1 = np.abs(finals[0] - finals[1]).max()
        d2 = np.abs(finals[1] - finals[2]).max()
        assert abs(math.log2(d1 / d2) - 4.0) < 0.7


class TestIntegrate:
    def test_zero_horizon_returns_initial_only(self, grid):
        cfg = StepperConfig(dt=0.1, t_end=0.0)
        traj = integrate(lambda y, dt: y, np.ones(4), cfg)
        assert traj.times == [0.0]
        assert np.array_equal(traj.states[0], np.ones(4))

    def test_observer_times_exact(self):
        cfg = StepperConfig(dt=0.03, t_end=1.0, observe_dt=0.25)
        assert observation_times(cfg) == [0.0, 0.25, 0.5, 0.75, 1.0]
        seen = []
        integrate(lambda y, dt: y, np.zeros(2), cfg,
                  observers=[lambda t, y: seen.append(t)])
        assert seen == [0.0, 0.25, 0.5, 0.75, 1.0]

    def test_final_time_appended_when_not_multiple(self):
        cfg = StepperConfig(dt=0.01, t_end=0.9, observe_dt=0.4)
        assert observation_times(cfg) == [0.0, 0.4, 0.8, 0.9]

    def test_deterministic_repeats(self):
        g = Grid1D(128, 30.0)
        p = DimensionlessParams(0.1, 0.0, 0.0, 0.1, math.sqrt(0.1))
        ctx = ModelContext.flat(p, g)
        y0 = LinearState(Field(g, gaussian_d2(g.x, 0.3, 1.5)),
                         Field(g, gaussian_d2(g.x, 0.3, 1.5)),
                         Field(g, gaussian_d1(g.x, 0.2, 1.5))).stack()
        step = rk4_stepper(
            lambda arr: weak_rotation_rhs(LinearState.from_stack(g, arr), ctx).stack())
        cfg = StepperConfig(dt=0.5 * g.dx, t_end=2.0, observe_dt=0.5)
        a = integrate(step, y0, cfg, grid=g)
        b = integrate(step, y0, cfg, grid=g)
        for sa, sb in zip(a.states, b.states):
            assert np.array_equal(sa, sb)

    def test_boussinesq_fourth_order_in_dt(self):
        g = Grid1D(256, 40.0)
        p = DimensionlessParams(0.1, 0.0, 0.0, 0.1, math.sqrt(0.1))
        ctx = ModelContext.flat(p, g)
        y0 = LinearState(Field(g, gaussian_d2(g.x, 0.3, 1.5)),
                         Field(g, gaussian_d2(g.x, 0.3, 1.5)),
                         Field(g, gaussian_d1(g.x, 0.2, 1.5))).stack()
        step = rk4_stepper(
            lambda arr: weak_rotation_rhs(LinearState.from_stack(g, arr), ctx).stack())
        finals = []
        for fac in (0.5, 0.25, 0.125):
            cfg = StepperConfig(dt=fac * g.dx, t_end=5.0)
            finals.append(integrate(step, y0, cfg, grid=g).states[-1])
        d1 = np.abs(finals[0] - finals[1]).max()
        d2 = np.abs(finals[1] - finals[2]).max()
        assert abs(math.log2(d1 / d2) - 4.0) < 0.4

    def test_cfl_guard_for_dispersive_rk4(self):
        g = Grid1D(512, 40.0)
        cfg = StepperConfig(dt=0.5 * g.dx, t_end=1.0, scheme="rk4")
        with pytest.raises(ConfigError):
            cfg.check_dispersive(g)
        fine = StepperConfig(dt=1e-4, t_end=1.0, scheme="rk4")
        fine.check_dispersive(g)  # no raise

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            StepperConfig(dt=-0.1, t_end=1.0)
        with pytest.raises(ConfigError):
            StepperConfig(dt=0.1, t_end=1.0, scheme="euler")
