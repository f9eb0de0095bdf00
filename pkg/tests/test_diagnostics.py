import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groupsep import (
    AgentConfiguration,
    ConfigurationError,
    CouplingSet,
    DegenerateGapError,
    InsufficientDataError,
    NoGapError,
    OdeBoundParams,
    PropagationPlan,
    growth_rate_check,
    ode_bounds,
    propagate,
    riccati_oracle,
    separation_report,
)
from groupsep.sampling import CommunicationSchedule, Scenario


def draw_params_with_gap(rng):
    while True:
        params = OdeBoundParams(
            a11=rng.uniform(0.0, 3.0), a12=rng.uniform(0.05, 2.0),
            a21=rng.uniform(0.05, 2.0), a22=rng.uniform(0.0, 3.0),
        )
        if params.delta > 0.0:
            return params


class TestSeparationReport:
    def test_collapsed_groups(self):
        report = separation_report(AgentConfiguration(x=[0.0, 0.0], y=[1.0, 1.0]))
        assert report.lam == 0.0
        assert report.lam_tilde == 0.0
        assert report.hyperplane_separated
        assert report.margin == pytest.approx(1.0)

    def test_forced_arithmetic(self):
        report = separation_report(AgentConfiguration(x=[0.0, 2.0], y=[3.0, 5.0]))
        assert report.lam == pytest.approx(2.0 / 9.0)
        assert report.lam_tilde == pytest.approx(2.0 / 9.0)
        assert report.hyperplane_vector == pytest.approx([1.0])
        assert report.margin == pytest.approx(1.0)
        assert report.separating_constant == pytest.approx(2.5)  # midpoint of [2, 3]
        assert report.hyperplane_separated

    def test_interleaved_groups(self):
        report = separation_report(AgentConfiguration(x=[0.0, 2.0], y=[1.0, 3.0]))
        assert report.margin == pytest.approx(-1.0)
        assert not report.hyperplane_separated

    def test_degenerate_gap(self):
        with pytest.raises(DegenerateGapError):
            separation_report(AgentConfiguration(x=[0.0, 2.0], y=[1.0]))

    @given(gamma=st.floats(min_value=1e-6, max_value=1e6))
    @settings(max_examples=40, deadline=None)
    def test_scale_invariance(self, gamma):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(5, 3))
        y = rng.normal(size=(4, 3)) + 2.0
        base = separation_report(AgentConfiguration(x=x, y=y))
        scaled = separation_report(AgentConfiguration(x=gamma * x, y=gamma * y))
        assert scaled.lam == pytest.approx(base.lam, rel=1e-9)
        assert scaled.lam_tilde == pytest.approx(base.lam_tilde, rel=1e-9)
        np.testing.assert_allclose(scaled.hyperplane_vector, base.hyperplane_vector, rtol=1e-9)
        assert scaled.hyperplane_separated == base.hyperplane_separated

    def test_l2_below_linf(self):
        rng = np.random.default_rng(6)
        for _ in range(25):
            cfg = AgentConfiguration(
                x=rng.normal(size=(6, 2)), y=rng.normal(size=(5, 2)) + 1.5
            )
            report = separation_report(cfg)
            assert report.lam <= report.lam_tilde + 1e-12

    def test_separation_persists_along_flow(self):
        # once a projection gap opens, nonnegative couplings keep it open
        rng = np.random.default_rng(77)
        ppx = (rng.random((6, 6)) < 0.5).astype(float)
        ppx = np.triu(ppx, 1)
        ppx = ppx + ppx.T
        ppy = (rng.random((6, 6)) < 0.5).astype(float)
        ppy = np.triu(ppy, 1)
        ppy = ppy + ppy.T
        pm = (rng.random((6, 6)) < 0.5).astype(float)
        schedule = CommunicationSchedule(
            kind=Scenario.STATIC,
            entries=((0, CouplingSet(psi_plus_x=ppx, psi_plus_y=ppy, psi_minus=pm)),),
            tau=1.0,
        )
        initial = AgentConfiguration(x=rng.random((6, 1)), y=rng.random((6, 1)) + 2.0)
        first = separation_report(initial)
        assert first.hyperplane_separated
        v = first.hyperplane_vector
        cut = (np.max(initial.x @ v) + np.min(initial.y @ v)) / 2.0
        assert first.separating_constant == pytest.approx(cut)
        plan = PropagationPlan(schedule=schedule, t_end=10.0,
                               sample_times=tuple(np.linspace(0.0, 10.0, 21)))
        for state in propagate(initial, plan):
            scale = math.exp(state.log_scale)
            assert np.max(state.x @ v) * scale < cut < np.min(state.y @ v) * scale


class TestOdeBounds:
    def test_reference_case(self):
        params = OdeBoundParams(a11=2.0, a12=1.0, a21=1.0, a22=2.0)
        assert params.delta == pytest.approx(12.0)
        rates = ode_bounds(params, initial_ratio=1.0)
        assert rates.lambda_plus == pytest.approx(2.0 + math.sqrt(3.0), abs=1e-7)
        assert rates.lambda_minus == pytest.approx(2.0 - math.sqrt(3.0), abs=1e-7)
        assert rates.mu == pytest.approx(1.0 + math.sqrt(3.0), abs=1e-7)
        assert rates.lambda_plus * rates.lambda_minus == pytest.approx(1.0, rel=1e-12)

    def test_negative_discriminant(self):
        params = OdeBoundParams(a11=0.0, a12=1.0, a21=1.0, a22=0.0)
        assert params.delta == pytest.approx(-4.0)
        with pytest.raises(NoGapError):
            ode_bounds(params, initial_ratio=0.5)

    def test_vanishing_reverse_rate(self):
        # a21 -> 0: the stable threshold collapses to zero
        for a21 in (1e-2, 1e-5, 1e-9):
            rates = ode_bounds(OdeBoundParams(a11=2.0, a12=1.0, a21=a21, a22=2.0), 1.0)
            assert rates.lambda_minus == pytest.approx(a21 / rates.lambda_plus / 1.0, rel=1e-9)
        assert ode_bounds(OdeBoundParams(2.0, 1.0, 1e-12, 2.0), 1.0).lambda_minus < 1e-11

    def test_initial_ratio_outside_basin(self):
        params = OdeBoundParams(a11=2.0, a12=1.0, a21=1.0, a22=2.0)
        with pytest.raises(ConfigurationError):
            ode_bounds(params, initial_ratio=4.0)

    def test_roots_satisfy_quadratic(self):
        rng = np.random.default_rng(15)
        for _ in range(50):
            params = draw_params_with_gap(rng)
            s = params.a11 + params.a22
            for root in (params.lambda_plus, params.lambda_minus):
                residual = params.a12 * root**2 - s * root + params.a21
                assert abs(residual) <= 1e-10 * max(1.0, params.a12 * root**2)

    def test_vieta_product(self):
        rng = np.random.default_rng(16)
        for _ in range(50):
            params = draw_params_with_gap(rng)
            product = params.lambda_plus * params.lambda_minus
            assert product == pytest.approx(params.a21 / params.a12, rel=1e-10)

    def test_parameter_validation(self):
        with pytest.raises(ConfigurationError):
            OdeBoundParams(a11=1.0, a12=0.0, a21=1.0, a22=1.0)
        with pytest.raises(ConfigurationError):
            OdeBoundParams(a11=1.0, a12=1.0, a21=-1.0, a22=1.0)


class TestRiccatiOracle:
    def test_equilibrium_start(self):
        params = OdeBoundParams(a11=2.0, a12=1.0, a21=1.0, a22=2.0)
        lam_minus = params.lambda_minus
        slack = riccati_oracle(params, lambda0=lam_minus, t_end=5.0)
        assert slack >= 0.0  # flow sits at the fixed point, bound adds exp decay

    def test_reference_case_dominated(self):
        params = OdeBoundParams(a11=2.0, a12=1.0, a21=1.0, a22=2.0)
        assert riccati_oracle(params, lambda0=1.0, t_end=10.0, step=1e-4) >= -1e-8

    def test_slow_decay_near_basin_edge(self):
        params = OdeBoundParams(a11=2.0, a12=1.0, a21=1.0, a22=2.0)
        lam0 = 0.99 * params.lambda_plus
        assert riccati_oracle(params, lambda0=lam0, t_end=10.0) >= -1e-8

    def test_random_draws_dominated(self):
        rng = np.random.default_rng(20)
        for _ in range(25):
            params = draw_params_with_gap(rng)
            lam_minus, lam_plus = params.lambda_minus, params.lambda_plus
            lam0 = lam_minus + rng.uniform(0.02, 0.98) * (lam_plus - lam_minus)
            assert riccati_oracle(params, lambda0=lam0, t_end=8.0) >= -1e-8

    def test_precondition_errors(self):
        params = OdeBoundParams(a11=2.0, a12=1.0, a21=1.0, a22=2.0)
        with pytest.raises(ConfigurationError):
            riccati_oracle(params, lambda0=params.lambda_plus + 0.1, t_end=5.0)
        with pytest.raises(NoGapError):
            riccati_oracle(OdeBoundParams(0.0, 1.0, 1.0, 0.0), lambda0=0.5, t_end=5.0)


def anti_pair_reports(sample_times):
    cs = CouplingSet(psi_plus_x=[[0.0]], psi_plus_y=[[0.0]], psi_minus=[[1.0]])
    schedule = CommunicationSchedule(kind=Scenario.STATIC, entries=((0, cs),), tau=1.0)
    plan = PropagationPlan(schedule=schedule, t_end=max(sample_times),
                           sample_times=tuple(sample_times), renormalize=True)
    states = propagate(AgentConfiguration(x=[0.0], y=[1.0]), plan)
    return [separation_report(s) for s in states]


class TestGrowthRateCheck:
    def test_anti_pair_rate_exact(self):
        # closed form: the mean gap is exp(2t), so every log-slope equals 2
        reports = anti_pair_reports(np.linspace(0.0, 10.0, 21))
        result = growth_rate_check(reports, q_bar=1.0)
        assert result.measured_rate == pytest.approx(2.0, abs=1e-9)
        assert result.threshold == pytest.approx(1.6)
        assert result.passed

    def test_frozen_dynamics_passes_only_at_zero_rate(self):
        # all couplings zero: identity propagation, gap exactly constant
        cs = CouplingSet(psi_plus_x=np.zeros((2, 2)), psi_plus_y=np.zeros((2, 2)),
                         psi_minus=np.zeros((2, 2)))
        schedule = CommunicationSchedule(kind=Scenario.STATIC, entries=((0, cs),), tau=1.0)
        plan = PropagationPlan(schedule=schedule, t_end=10.0,
                               sample_times=tuple(np.linspace(0.0, 10.0, 11)))
        states = propagate(AgentConfiguration(x=[0.0, 0.2], y=[1.0, 1.2]), plan)
        reports = [separation_report(s) for s in states]
        zero_rate = growth_rate_check(reports, q_bar=0.0)
        assert zero_rate.measured_rate == 0.0
        assert zero_rate.passed
        assert not growth_rate_check(reports, q_bar=0.2).passed

    def test_mean_field_sample_meets_estimate(self):
        # constant-weight couplings satisfy the good-coupling conditions and
        # push the means apart at exactly twice the mean cross weight
        n, p, q = 40, 0.3, 0.2
        ppx = np.full((n, n), p)
        np.fill_diagonal(ppx, 0.0)
        cs = CouplingSet(psi_plus_x=ppx, psi_plus_y=ppx.copy(), psi_minus=np.full((n, n), q))
        from groupsep import check_conditions

        assert check_conditions(cs, p=p, q=q, alpha=0.5).overall_pass
        schedule = CommunicationSchedule(kind=Scenario.STATIC, entries=((0, cs),), tau=1.0)
        plan = PropagationPlan(schedule=schedule, t_end=20.0,
                               sample_times=tuple(np.linspace(0.0, 20.0, 21)))
        rng = np.random.default_rng(55)
        states = propagate(
            AgentConfiguration(x=rng.random((n, 1)), y=rng.random((n, 1))), plan
        )
        reports = [separation_report(s) for s in states]
        result = growth_rate_check(reports, q_bar=q, burn_in=5.0)
        assert result.passed
        assert result.measured_rate >= 0.8 * 2.0 * q

    def test_insufficient_data(self):
        reports = anti_pair_reports([0.0, 6.0, 7.0])
        with pytest.raises(InsufficientDataError):
            growth_rate_check(reports, q_bar=1.0, burn_in=5.0)
