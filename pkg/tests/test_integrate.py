"""Integrator tests: exact constant shot, dense output, traps, energy decay."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boundstate_lab import (
    CLASSIFY_POLICY,
    FULL_RANGE_POLICY,
    FieldParams,
    IntegratorControls,
    ParameterError,
    ProblemParams,
    State,
    big_F,
    integrate,
    rhs,
    series_start,
)
from boundstate_lab.integrate import (
    ENERGY_NONPOSITIVE,
    REACHED_RMAX,
    VARIATION_DIVERGED,
    DenseRangeError,
)

FL = FieldParams(3, 3.0)


def _energy(state, field):
    return 0.5 * state.up**2 + big_F(state.u, field)


def test_rest_height_shot_is_exactly_constant():
    traj = integrate(ProblemParams(FL, 1.0, IntegratorControls().with_rmax(50.0)),
                     FULL_RANGE_POLICY)
    assert traj.termination.tag == REACHED_RMAX
    for s in traj.samples():
        assert s.u == 1.0
        assert s.up == 0.0
    # the variation still evolves: v'' + (2/r)v' + 2v = 0 oscillates
    vs = [s.v for s in traj.samples()]
    assert min(vs) < 0.0 < max(vs)


def test_rhs_requires_positive_radius():
    with pytest.raises(ParameterError):
        rhs(State(r=0.0, u=1.0, up=0.0, v=1.0, vp=0.0), FL)


def test_series_start_matches_curvature():
    prob = ProblemParams(FL, 3.0, IntegratorControls(r0=1e-4))
    s = series_start(prob)
    # u(r) = alpha - f(alpha) r^2 / (2n) + O(r^4), f(3) = 24, n = 3
    assert s.u == pytest.approx(3.0 - 24.0 * 1e-8 / 6.0, abs=1e-16)
    assert s.up == pytest.approx(-24.0 * 1e-4 / 3.0, rel=1e-12)
    assert s.v == pytest.approx(1.0 - 26.0 * 1e-8 / 6.0, abs=1e-16)


def test_series_start_r0_must_sit_inside_range():
    with pytest.raises(ParameterError):
        series_start(ProblemParams(FL, 2.0, IntegratorControls(r0=200.0)))


def test_alpha_must_be_positive():
    with pytest.raises(ParameterError):
        ProblemParams(FL, -1.0)
    with pytest.raises(ParameterError):
        ProblemParams(FL, float("nan"))


def test_energy_trap_fires_immediately_below_the_well_zero():
    # F(0.5) < 0, so the shot starts with nonpositive energy
    traj = integrate(ProblemParams(FL, 0.5), CLASSIFY_POLICY)
    assert traj.termination.tag == ENERGY_NONPOSITIVE
    assert traj.termination.r_stop < 1e-3


def test_full_range_policy_ignores_the_energy_trap():
    traj = integrate(ProblemParams(FL, 0.5, IntegratorControls().with_rmax(30.0)),
                     FULL_RANGE_POLICY)
    assert traj.termination.tag == REACHED_RMAX
    assert traj.r_end == pytest.approx(30.0, abs=1e-12)


def test_variation_guard_trips_near_a_jump_amplitude():
    # just off a bracket the variation grows like e^r and hits the guard
    traj = integrate(ProblemParams(FL, 4.337387679942187,
                                   IntegratorControls().with_rmax(200.0)),
                     FULL_RANGE_POLICY)
    assert traj.termination.tag == VARIATION_DIVERGED
    assert max(abs(s.v) for s in traj.samples()) >= 1e11


def test_dense_output_matches_knots_and_is_continuous():
    traj = integrate(ProblemParams(FL, 5.0, IntegratorControls().with_rmax(20.0)),
                     FULL_RANGE_POLICY)
    for i in (0, len(traj.knots) // 2, len(traj.knots) - 1):
        s_knot = traj.state_at_knot(i)
        s_dense = traj.eval_dense(traj.knots[i])
        assert s_dense.u == pytest.approx(s_knot.u, rel=1e-12, abs=1e-12)
        assert s_dense.up == pytest.approx(s_knot.up, rel=1e-12, abs=1e-12)
    mid = len(traj.knots) // 3
    r = traj.knots[mid]
    left = traj.eval_dense(r - 1e-13)
    right = traj.eval_dense(r + 1e-13)
    assert left.u == pytest.approx(right.u, rel=1e-9, abs=1e-12)


def test_dense_output_rejects_out_of_range_radii():
    traj = integrate(ProblemParams(FL, 2.0, IntegratorControls().with_rmax(10.0)),
                     FULL_RANGE_POLICY)
    with pytest.raises(DenseRangeError):
        traj.eval_dense(traj.r_end + 1.0)
    with pytest.raises(DenseRangeError):
        traj.eval_dense(traj.r_start * 0.5)


def test_energy_never_increases_along_the_run():
    traj = integrate(ProblemParams(FL, 5.0, IntegratorControls().with_rmax(25.0)),
                     FULL_RANGE_POLICY)
    es = [_energy(s, FL) for s in traj.samples()]
    scale = abs(es[0])
    for prev, cur in zip(es, es[1:]):
        assert cur <= prev + 1e-11 * scale


def test_tolerance_controls_the_cross_check_error():
    base = integrate(ProblemParams(FL, 3.0, IntegratorControls().with_rmax(15.0)),
                     FULL_RANGE_POLICY)
    tight = integrate(
        ProblemParams(FL, 3.0, IntegratorControls().tightened(100.0).with_rmax(15.0)),
        FULL_RANGE_POLICY)
    u_base = base.eval_dense(10.0).u
    u_tight = tight.eval_dense(10.0).u
    assert u_base == pytest.approx(u_tight, abs=1e-7)


@settings(max_examples=25, deadline=None)
@given(alpha=st.floats(min_value=0.2, max_value=10.0))
def test_profile_amplitude_is_bounded_by_the_energy(alpha):
    # E decreasing confines |u| to the F(u) <= F(alpha) well component; at
    # p=3 its outer edge is sqrt(2 - alpha^2) when that beats alpha, so a
    # small-amplitude shot may legitimately overshoot u = 1 on its way in
    traj = integrate(ProblemParams(FL, alpha, IntegratorControls().with_rmax(25.0)),
                     FULL_RANGE_POLICY)
    edge = max(alpha, math.sqrt(max(2.0 - alpha * alpha, 0.0)))
    bound = edge * (1.0 + 1e-9)
    assert all(abs(s.u) <= bound for s in traj.samples())
    rs = [s.r for s in traj.samples()]
    assert all(b > a for a, b in zip(rs, rs[1:]))


def test_knots_cover_and_terminate_cleanly():
    traj = integrate(ProblemParams(FL, 2.0, IntegratorControls().with_rmax(12.0)),
                     FULL_RANGE_POLICY)
    assert traj.r_start < 1e-5
    assert traj.r_end == pytest.approx(12.0, abs=1e-12)
    assert len(traj.knots) == len(traj.states)
    assert len(traj.seg_coeffs) == len(traj.knots) - 1
    assert math.isfinite(traj.termination.r_stop)
