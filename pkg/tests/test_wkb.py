import numpy as np
import pytest

from rswlab.core import Field, Grid1D, l2_norm
from rswlab.errors import NotAnOstrovskySolution, SlowTimeOutOfRange
from rswlab.models import kdv_nonlinear, ostrovsky_symbol
from rswlab.profiles import gaussian_d1, gaussian_d2
from rswlab.spectral import antideriv, deriv, shift
from rswlab.timeint import StepperConfig, ifrk4_stepper, integrate
from rswlab.wkb import SlowTrajectory, leading_ansatz, solve_correctors, v_corrector


@pytest.fixture(scope="module")
def ostrov_traj():
    g = Grid1D(256, 60.0)
    k0 = Field(g, gaussian_d2(g.x, 0.5, 2.0))
    step = ifrk4_stepper(g, ostrovsky_symbol(g), kdv_nonlinear, require_zero_mean=True)
    cfg = StepperConfig(dt=0.1 * g.dx, t_end=0.5, scheme="ifrk4", observe_dt=0.5 / 64)
    traj = integrate(step, k0.values, cfg, grid=g)
    return SlowTrajectory.from_trajectory(traj, g)


class TestLeadingAnsatz:
    def test_t_zero_returns_initial_profile(self, ostrov_traj):
        za, ua = leading_ansatz(ostrov_traj, 0.1, 0.0)
        assert np.abs(za.values - ostrov_traj.snapshots[0].values).max() < 1e-14
        assert za is ua or np.array_equal(za.values, ua.values)

    def test_mu_zero_is_pure_translate(self, ostrov_traj):
        za, _ = leading_ansatz(ostrov_traj, 0.0, 3.7)
        expect = shift(ostrov_traj.snapshots[0], 3.7)
        assert np.abs(za.values - expect.values).max() < 1e-12

    def test_out_of_range_slow_time(self, ostrov_traj):
        with pytest.raises(SlowTimeOutOfRange):
            leading_ansatz(ostrov_traj, 0.1, 100.0)

    def test_commutes_with_translation(self, ostrov_traj):
        mu, t = 0.05, 2.0
        za, _ = leading_ansatz(ostrov_traj, mu, t)
        shifted_family = SlowTrajectory(
            ostrov_traj.taus,
            tuple(shift(s, 1.3) for s in ostrov_traj.snapshots),
            ostrov_traj.grid)
        zb, _ = leading_ansatz(shifted_family, mu, t)
        assert np.abs(zb.values - shift(za, 1.3).values).max() < 1e-11

    def test_fast_transport_residual_is_first_order(self, ostrov_traj):
        # d_t zeta_app + d_x zeta_app = mu (d_tau k)(x - t, mu t):
        # the fast-operator residual shrinks like mu
        g = ostrov_traj.grid
        t = 1.0
        res = []
        mus = [0.2, 0.1, 0.05]
        for mu in mus:
            dt = 1e-5
            zp, _ = leading_ansatz(ostrov_traj, mu, t + dt)
            zm, _ = leading_ansatz(ostrov_traj, mu, t - dt)
            z0, _ = leading_ansatz(ostrov_traj, mu, t)
            dtz = (zp.values - zm.values) / (2 * dt)
            resid = dtz + deriv(z0, 1).values
            res.append(np.abs(resid).max())
        slope = np.polyfit(np.log(mus), np.log(res), 1)[0]
        assert abs(slope - 1.0) < 0.2


class TestVCorrector:
    def test_t_zero_recovers_v0(self, ostrov_traj):
        v0 = Field(ostrov_traj.grid, gaussian_d1(ostrov_traj.grid.x, 0.3, 2.0))
        out = v_corrector(ostrov_traj, v0, 0.0, 0.1)
        assert np.abs(out.values - v0.values).max() < 1e-12

    def test_cancellation_choice(self, ostrov_traj):
        # v0 = dx^{-1} k0 collapses the corrector onto the moving antiderivative
        v0 = antideriv(ostrov_traj.snapshots[0])
        t, mu = 2.5, 0.1
        out = v_corrector(ostrov_traj, v0, t, mu)
        expect = shift(antideriv(ostrov_traj.interp(mu * t)), t)
        assert np.abs(out.values - expect.values).max() < 1e-12

    def test_zero_mean_at_all_times(self, ostrov_traj):
        v0 = Field(ostrov_traj.grid, gaussian_d1(ostrov_traj.grid.x, 0.3, 2.0))
        for t in (0.0, 1.0, 4.0):
            out = v_corrector(ostrov_traj, v0, t, 0.1)
            assert abs(out.values.mean()) < 1e-13

    def test_time_derivative_plus_k_is_first_order(self, ostrov_traj):
        # d_t v_corr + k(x - t, mu t) vanishes with mu
        g = ostrov_traj.grid
        v0 = Field(g, gaussian_d1(g.x, 0.3, 2.0))
        t = 1.5
        res = []
        mus = [0.2, 0.1, 0.05]
        for mu in mus:
            dt = 1e-5
            vp = v_corrector(ostrov_traj, v0, t + dt, mu)
            vm = v_corrector(ostrov_traj, v0, t - dt, mu)
            dtv = (vp.values - vm.values) / (2 * dt)
            k_here = shift(ostrov_traj.interp(mu * t), t)
            res.append(np.abs(dtv + k_here.values).max())
        slope = np.polyfit(np.log(mus), np.log(res), 1)[0]
        assert abs(slope - 1.0) < 0.25


class TestSolveCorrectors:
    def test_zero_everything_stays_zero(self):
        g = Grid1D(128, 40.0)
        z = Field.zeros(g)
        taus = np.linspace(0.0, 0.2, 9)
        traj = SlowTrajectory(taus, tuple([z] * 9), g)
        wp, wm = solve_correctors(traj, z, z, t_end=1.0, mu=0.2)
        assert np.abs(wp.states[-1]).max() == 0.0
        assert np.abs(wm.states[-1]).max() == 0.0

    def test_bracket_vanishes_on_solutions(self, ostrov_traj):
        # 2 d_tau k + 3 k k' + k'''/3 - dx^{-1}k, with d_tau from centered
        # differences of the snapshots, stays at the integration-error level
        worst = 0.0
        for j in range(1, len(ostrov_traj.taus) - 1, 8):
            dtau = ostrov_traj.taus[j + 1] - ostrov_traj.taus[j - 1]
            fd = (ostrov_traj.snapshots[j + 1].values
                  - ostrov_traj.snapshots[j - 1].values) / dtau
            k = ostrov_traj.snapshots[j]
            bracket = (2.0 * fd + 3.0 * (k * deriv(k, 1)).values
                       + deriv(k, 3).values / 3.0 - antideriv(k).values)
            worst = max(worst, l2_norm(Field(ostrov_traj.grid, bracket)))
        # centered differences at spacing dtau: error O(dtau^2 * |k_tautau|)
        assert worst < 1e-3

    def test_rejects_non_solutions(self):
        g = Grid1D(128, 40.0)
        k0 = Field(g, gaussian_d2(g.x, 0.5, 2.0))
        taus = np.linspace(0.0, 0.2, 9)
        snaps = tuple(Field(g, (1.0 + 3.0 * t) * k0.values) for t in taus)
        traj = SlowTrajectory(taus, snaps, g)
        with pytest.raises(NotAnOstrovskySolution):
            solve_correctors(traj, antideriv(k0), Field.zeros(g), 0.5, 0.2)

    def test_g_consistency_enforced(self, ostrov_traj):
        g = ostrov_traj.grid
        v0 = Field(g, gaussian_d1(g.x, 0.3, 2.0))
        wrong_g = Field(g, np.roll(v0.values, 5))
        with pytest.raises(ValueError):
            solve_correctors(ostrov_traj, v0, wrong_g, 0.5, 0.2)

    def test_stationary_part_stays_bounded(self, ostrov_traj):
        # the w_plus Duhamel of the stationary forcing is g*(1-e^{-i xi t})/(i xi):
        # bounded uniformly in t (no secular growth)
        g = ostrov_traj.grid
        v0 = Field(g, gaussian_d1(g.x, 0.3, 2.0))
        gg = v0 - antideriv(ostrov_traj.snapshots[0])
        mu = 0.1
        times = [1.0, 2.0, 4.0]
        wp, _ = solve_correctors(ostrov_traj, v0, gg, t_end=4.0, mu=mu, out_times=times)
        norms = [l2_norm(Field(g, s)) for s in wp.states]
        bound = 2.0 * l2_norm(antideriv(gg)) + 1e-6
        assert all(v <= bound for v in norms)

    def test_w_minus_growth_is_sublinear(self):
        # |w_-(t)|_2 / t must decline: no resonant forcing in the opposite
        # characteristic family
        g = Grid1D(256, 120.0)
        k0 = Field(g, gaussian_d2(g.x, 0.5, 2.0))
        mu = 0.05
        horizon = 100.0
        step = ifrk4_stepper(g, ostrovsky_symbol(g), kdv_nonlinear,
                             require_zero_mean=True)
        cfg = StepperConfig(dt=0.1 * g.dx, t_end=mu * horizon, scheme="ifrk4",
                            observe_dt=mu * horizon / 512)
        traj = SlowTrajectory.from_trajectory(
            integrate(step, k0.values, cfg, grid=g), g)
        v0 = Field(g, gaussian_d1(g.x, 0.3, 2.0))
        gg = v0 - antideriv(k0)
        times = [10.0, 30.0, 100.0]
        _, wm = solve_correctors(traj, v0, gg, t_end=horizon, mu=mu, out_times=times)
        ratios = [l2_norm(Field(g, s)) / t for s, t in zip(wm.states, times)]
        assert ratios[0] > ratios[1] > ratios[2]
