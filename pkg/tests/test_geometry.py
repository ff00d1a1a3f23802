import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hostpar.geometry import (
    RegimeError,
    Side,
    exit_curve,
    gamma_invariant,
    predict_side,
    score_side_predictions,
    separatrix_gamma,
    triangle_grid,
    u_infinity,
)
from hostpar.integrate import IntegrationOptions, integrate
from hostpar.params import Params

FIG4 = Params(4.0, 0.5, 0.075, 0.1, 0.001)
FIG5A = Params(4.0, 0.5, 0.5, 0.1, 0.005)


class TestInvariant:
    def test_frozen_value(self):
        assert gamma_invariant(FIG4, (0.3, 0.3)) == pytest.approx(
            2.9876031643714431, abs=1e-12
        )

    def test_axis_restriction(self):
        p = FIG4
        u = 0.42
        assert gamma_invariant(p, (u, 0.0)) == pytest.approx(
            u ** (1.0 - p.d / p.beta), rel=1e-14
        )

    def test_requires_positive_susceptibles(self):
        with pytest.raises(ValueError):
            gamma_invariant(FIG4, (0.0, 0.3))

    def test_conserved_along_fast_flow(self):
        ref = gamma_invariant(FIG4, (0.3, 0.3))
        opts = IntegrationOptions(rel_tol=1e-10, abs_tol=1e-13, t_max=200.0)
        traj = integrate(FIG4, (0.3, 0.3), opts, field_id="fast")
        drift = max(abs(gamma_invariant(FIG4, s) - ref) / ref for s in traj.states)
        assert drift < 1e-7


class TestAxisLimit:
    def test_frozen_value(self):
        assert u_infinity(FIG4, (0.3, 0.3)) == pytest.approx(0.0375, abs=1e-15)

    def test_no_infection_means_no_motion(self):
        assert u_infinity(FIG4, (0.61, 0.0)) == 0.61

    def test_aggressive_infection_collapses_everything(self):
        assert u_infinity(FIG5A, (0.3, 0.3)) == 0.0
        assert u_infinity(Params(4.0, 0.5, 0.1, 0.1, 0.005), (0.3, 0.3)) == 0.0

    @given(
        st.floats(min_value=0.05, max_value=0.9),
        st.floats(min_value=0.0, max_value=0.5),
    )
    @settings(max_examples=150, deadline=None)
    def test_landing_point_preserves_invariant(self, u0, v0):
        limit = u_infinity(FIG4, (u0, v0))
        lhs = gamma_invariant(FIG4, (u0, v0))
        rhs = gamma_invariant(FIG4, (limit, 0.0))
        assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(lhs))

    def test_landing_point_never_exceeds_start(self):
        for v0 in (0.0, 0.1, 0.4):
            assert u_infinity(FIG4, (0.5, v0)) <= 0.5


class TestSeparatrices:
    def test_anchor(self):
        assert separatrix_gamma(FIG4, 0.75) == pytest.approx(0.0, abs=1e-15)

    def test_frozen_value(self):
        assert separatrix_gamma(FIG4, 0.9) == pytest.approx(0.056392712264349959, abs=1e-10)

    def test_invariant_constant_along_curve(self):
        anchor = gamma_invariant(FIG4, (0.75, 0.0))
        for i in range(1, 101):
            u = 0.0099 * i
            v = separatrix_gamma(FIG4, u)
            if v >= 0.0:
                assert abs(gamma_invariant(FIG4, (u, v)) - anchor) < 1e-12

    def test_exit_curve_anchor_and_frozen_value(self):
        assert exit_curve(FIG5A, 0.5, 0.5) == pytest.approx(0.0, abs=1e-15)
        assert exit_curve(FIG5A, 0.5, 0.25) == pytest.approx(0.18527528164806207, abs=1e-10)

    def test_exit_curve_through_dfe_is_the_separatrix(self):
        for i in range(1, 50):
            u = 0.02 * i
            assert exit_curve(FIG5A, 0.75, u) == pytest.approx(
                separatrix_gamma(FIG5A, u), abs=1e-15
            )

    def test_tangency_at_extinction(self):
        # d/beta < 1: the curve leaves the origin vertically (slope -> +inf);
        # d/beta > 1: it leaves with slope -> -1 (outside the triangle).
        def slope(p, u, h=1e-9):
            return (separatrix_gamma(p, u + h) - separatrix_gamma(p, u - h)) / (2 * h)

        assert FIG5A.d / FIG5A.beta < 1.0
        assert slope(FIG5A, 1e-6) > 1e2
        assert FIG4.d / FIG4.beta > 1.0
        assert slope(FIG4, 1e-9, h=1e-12) == pytest.approx(-1.0, abs=1e-2)


class TestSidePrediction:
    def test_reference_values(self):
        assert u_infinity(FIG4, (0.9, 0.02)) == pytest.approx(0.84257109394263171, abs=1e-12)
        assert predict_side(FIG4, (0.9, 0.02)) is Side.RIGHT
        assert predict_side(FIG4, (0.3, 0.3)) is Side.LEFT

    def test_on_curve(self):
        u = 0.9
        v = separatrix_gamma(FIG4, u)
        assert v > 0.0
        assert predict_side(FIG4, (u, v)) is Side.ON_CURVE

    def test_regime_guards(self):
        with pytest.raises(RegimeError):
            predict_side(FIG5A, (0.3, 0.3))  # beta > d
        with pytest.raises(RegimeError):
            predict_side(Params(0.5, 0.5, 0.075, 0.1, 0.001), (0.3, 0.3))

    def test_agreement_with_simulation_small_grid(self):
        score = score_side_predictions(FIG4, triangle_grid(6, 6))
        assert score.agreement == 1.0


def test_infected_ratio_grows_at_fast_rate():
    # Along the infection-timescale flow with beta > d the ratio v/u grows
    # like exp((beta-d)*t); fit the log-ratio slope over a trajectory.
    p = FIG5A
    opts = IntegrationOptions(rel_tol=1e-10, abs_tol=1e-13, t_max=10.0)
    traj = integrate(p, (0.3, 0.3), opts, field_id="fast")
    ts = traj.times
    logr = [math.log(v / u) for u, v in traj.states]
    n = len(ts)
    mean_t = sum(ts) / n
    mean_y = sum(logr) / n
    slope = sum((t - mean_t) * (y - mean_y) for t, y in zip(ts, logr)) / sum(
        (t - mean_t) ** 2 for t in ts
    )
    assert slope == pytest.approx(p.beta - p.d, rel=0.01)


def test_triangle_grid_is_interior_and_complete():
    grid = triangle_grid(20, 20)
    assert len(grid) == 400
    assert all(u > 0 and v > 0 and u + v < 1 for u, v in grid)
