import numpy as np
import pytest

from rswlab.core import DimensionlessParams, Field, Grid1D, LinearState
from rswlab.errors import DomainTooSmall
from rswlab.models import (ModelContext, kdv_nonlinear, ostrovsky_symbol,
                           poincare_semigroup)
from rswlab.profiles import gaussian, gaussian_d1, gaussian_d2
from rswlab.spectral import deriv
from rswlab.studies import (decay_study, fit_slope, monitor_invariants,
                            reduction_residual_study)
from rswlab.timeint import (StepperConfig, Trajectory, ifrk4_stepper,
                            integrate, rk4_stepper)


class TestMonitor:
    def test_geostrophic_residual_stays_small_on_linear_run(self):
        g = Grid1D(1024, 200.0)
        v0 = Field(g, gaussian(g.x, 0.5, 2.0))
        s0 = LinearState(deriv(v0, 1), Field(g, gaussian_d1(g.x, 0.4, 2.0)), v0)
        times = list(np.linspace(0.0, 50.0, 11))
        traj = Trajectory(times, [poincare_semigroup(s0, t).stack() for t in times],
                          g, LinearState.labels)
        rep = monitor_invariants(traj)
        assert max(rep.series["geostrophic"]) < 1e-10
        assert rep.flags["geostrophic"]["ok"]

    def test_boussinesq_mass_conservation(self):
        from rswlab.core import BoussinesqState
        from rswlab.models import boussinesq_rhs
        g = Grid1D(256, 60.0)
        p = DimensionlessParams(0.1, 0.0, 0.0, 0.1, 1.0)
        ctx = ModelContext.flat(p, g)
        v0 = Field(g, gaussian(g.x, 0.5, 2.0))
        st = BoussinesqState(deriv(v0, 1), Field(g, gaussian_d1(g.x, 0.4, 2.0)),
                             v0, Field(g, gaussian_d1(g.x, 1.0, 2.0)),
                             Field(g, gaussian_d1(g.x, 1.0, 2.0)))
        step = rk4_stepper(
            lambda arr: boussinesq_rhs(BoussinesqState.from_stack(g, arr), ctx).stack())
        traj = integrate(step, st.stack(), StepperConfig(dt=0.5 * g.dx, t_end=10.0,
                                                         observe_dt=1.0),
                         grid=g, labels=BoussinesqState.labels)
        rep = monitor_invariants(traj, params=p, b=Field.zeros(g))
        masses = rep.series["mass"]
        assert max(abs(m - masses[0]) for m in masses) < 1e-12 * g.n
        assert rep.flags["mass"]["ok"]
        assert "max_w" in rep.series and "energy" in rep.series

    def test_ostrovsky_l2_drift_improves_with_dt(self):
        g = Grid1D(256, 40.0)
        k0 = Field(g, gaussian_d2(g.x, 0.5, 1.5)).values
        step = ifrk4_stepper(g, ostrovsky_symbol(g), kdv_nonlinear,
                             require_zero_mean=True)
        drifts = []
        for fac in (0.5, 0.25):
            traj = integrate(step, k0, StepperConfig(dt=fac * g.dx, t_end=10.0,
                                                     scheme="ifrk4", observe_dt=5.0),
                             grid=g, labels=("k",))
            rep = monitor_invariants(traj, model="ostrovsky")
            l2 = rep.series["l2"]
            drifts.append(abs(l2[-1] - l2[0]) / l2[0])
            assert max(rep.series["zero_mean"]) < 1e-14
        assert drifts[0] < 1e-6
        assert drifts[1] < drifts[0]


class TestDecay:
    def test_zero_data_is_degenerate(self):
        g = Grid1D(1024, 800.0)
        z = Field.zeros(g)
        rep = decay_study(LinearState(z, z, z), [5.0, 50.0, 100.0])
        assert rep.degenerate and rep.exponent is None

    def test_domain_guard(self):
        g = Grid1D(256, 100.0)
        z = Field.zeros(g)
        u0 = Field(g, gaussian(g.x, 1.0, 1.0))
        with pytest.raises(DomainTooSmall):
            decay_study(LinearState(z, u0, z), [5.0, 100.0])

    def test_edge_decay_guard(self):
        g = Grid1D(1024, 800.0)
        z = Field.zeros(g)
        u0 = Field(g, gaussian(g.x, 1.0, 200.0))  # far too wide
        with pytest.raises(DomainTooSmall):
            decay_study(LinearState(z, u0, z), [5.0, 100.0])

    def test_gaussian_decay_exponent_near_half(self):
        g = Grid1D(4096, 800.0)
        z = Field.zeros(g)
        u0 = Field(g, gaussian(g.x, 1.0, 1.0))
        rep = decay_study(LinearState(z, u0, z), np.linspace(5.0, 100.0, 25))
        assert 0.4 <= rep.exponent <= 0.6


class TestReductions:
    def test_unknown_pair_rejected(self):
        with pytest.raises(ValueError):
            reduction_residual_study("nope")

    def test_needs_three_mus(self):
        with pytest.raises(ValueError):
            reduction_residual_study("boussinesq_to_weak", mu_values=(0.1,))

    @pytest.mark.parametrize("pair,expected", [
        ("gn_to_boussinesq", 2.0),
        ("boussinesq_to_weak", 2.0),
        ("gn_medium_to_weak", 1.5),
    ])
    def test_consistency_orders(self, pair, expected):
        rep = reduction_residual_study(pair, resolution_check=False)
        assert rep.passed, rep.as_dict()
        assert abs(rep.fitted_slope - expected) < 0.3
        assert all(e > 0 for e in rep.errors)

    def test_report_is_json_ready(self):
        import json
        rep = reduction_residual_study("boussinesq_to_weak", resolution_check=False)
        json.dumps(rep.as_dict())

    def test_zero_state_family_is_degenerate(self):
        from rswlab.studies import ReductionStateFamily

        class ZeroFamily(ReductionStateFamily):
            def fields(self):
                return {name: Field.zeros(self.grid)
                        for name in super().fields()}

        rep = reduction_residual_study("gn_to_boussinesq",
                                       state_family=ZeroFamily,
                                       resolution_check=False)
        assert rep.status == "degenerate" and rep.passed
        assert max(rep.errors) == 0.0


class TestThreadedSweep:
    def test_threads_do_not_change_results(self):
        from dataclasses import replace
        from rswlab.studies import approximation_study, default_approximation_config
        cfg = replace(default_approximation_config("KdV"), n=512, length=100.0,
                      resolution_check=False)
        one = approximation_study("KdV", config=cfg)
        two = approximation_study("KdV", config=replace(cfg, threads=2))
        assert one.errors == two.errors
        assert one.fitted_slope == two.fitted_slope


class TestSlowInterpolationGuard:
    def test_coarse_snapshot_table_rejected(self):
        from dataclasses import replace
        from rswlab.errors import RegimeViolation
        from rswlab.studies import approximation_study, default_approximation_config
        cfg = replace(default_approximation_config("KdV"), n=512, length=100.0,
                      resolution_check=False, slow_snapshots=3,
                      slow_interp_tol=1e-6)
        with pytest.raises(RegimeViolation):
            approximation_study("KdV", mu_values=(0.2, 0.1, 0.05), config=cfg)

    def test_refinement_error_decreases_with_snapshots(self):
        from rswlab.models import kdv_symbol, kdv_nonlinear
        from rswlab.profiles import gaussian_d2
        from rswlab.wkb import SlowTrajectory
        g = Grid1D(256, 60.0)
        k0 = Field(g, gaussian_d2(g.x, 0.5, 2.0)).values
        step = ifrk4_stepper(g, kdv_symbol(g), kdv_nonlinear)
        errs = []
        for snaps in (8, 32):
            cfg = StepperConfig(dt=0.1 * g.dx, t_end=1.0, scheme="ifrk4",
                                observe_dt=1.0 / snaps)
            traj = SlowTrajectory.from_trajectory(
                integrate(step, k0, cfg, grid=g), g)
            errs.append(traj.interp_refinement_error())
        assert errs[1] < errs[0] / 4


class TestSlopeFit:
    def test_exact_power_law(self):
        mus = [0.2, 0.1, 0.05, 0.025]
        errs = [0.7 * m ** 2 for m in mus]
        assert abs(fit_slope(mus, errs) - 2.0) < 1e-12

    def test_needs_three_points(self):
        with pytest.raises(ValueError):
            fit_slope([0.1, 0.05], [1.0, 0.5])

    def test_degenerate_identical_models_reports_pass(self):
        # comparator == reference: errors at round-off, no slope, still a pass
        from rswlab.studies import assemble_slope_report
        rep = assemble_slope_report("degenerate_demo", [0.1, 0.05, 0.025],
                                    [3e-16, 1e-16, 2e-16], 1.0, (0.7, 1.3),
                                    [True, True, True])
        assert rep.passed and rep.fitted_slope is None and rep.status == "degenerate"

    def test_pre_asymptotic_largest_mu_excluded(self):
        from rswlab.studies import assemble_slope_report
        mus = [0.025, 0.05, 0.1, 0.2]
        errs = [0.025, 0.05, 0.1, 0.09]  # plateau at the largest mu
        rep = assemble_slope_report("demo", mus, errs, 1.0, (0.75, 1.25),
                                    [True] * 4)
        assert any("pre-asymptotic" in e["reason"] for e in rep.excluded)
        assert rep.passed and abs(rep.fitted_slope - 1.0) < 1e-12

    def test_under_resolved_report(self):
        from rswlab.studies import assemble_slope_report
        rep = assemble_slope_report("demo", [0.1, 0.05, 0.025],
                                    [0.1, 0.05, 0.025], 1.0, (0.75, 1.25),
                                    [True, False, False])
        assert rep.status == "under_resolved" and not rep.passed
        assert rep.fitted_slope is None
