"""Classifier tests: frozen jump amplitudes, tags, ladders, zero monotonicity."""

import pytest

from boundstate_lab import (
    BOUND_STATE_CANDIDATE,
    CONSTANT,
    OSCILLATORY,
    BracketNotFound,
    FieldParams,
    IntegratorControls,
    classify,
    find_alpha_k,
    node_count_of_alpha,
    zero_monotonicity_scan,
)

# jump amplitudes frozen from an independent coarse-grid + bisection oracle
# run at 10x tighter integrator tolerances
ALPHA_33 = (4.337387679942187, 14.103584404913107, 29.131211576153888)
BRACKET_3_15 = {0: (4.276541696875641, 4.276541696879352),
                1: (9.817613650894993, 9.817613650902416)}
BRACKET_3_12 = {0: (4.382651319957, 4.382651319961)}
MID_3_12_K1 = 9.704060612815985
BRACKET_42 = {0: (8.671934300011344, 8.671934300016801),
              1: (37.209564704899094, 37.209564704920922)}


def test_ladder_matches_frozen_amplitudes(ladder33):
    for k, alpha_k in enumerate(ALPHA_33):
        entry = ladder33.entry(k)
        assert entry.alpha_lo <= alpha_k <= entry.alpha_hi
        assert entry.width <= 1e-12 * entry.alpha_lo * 1.01
        assert (entry.nodes_lo, entry.nodes_hi) == (k, k + 1)


def test_ladder_entries_strictly_increase(ladder33):
    entries = ladder33.entries
    for prev, cur in zip(entries, entries[1:]):
        assert cur.alpha_lo > prev.alpha_hi


def test_shallow_exponent_brackets_match_oracle():
    fl = FieldParams(3, 1.5)
    for k, (lo, hi) in BRACKET_3_15.items():
        entry = find_alpha_k(fl, k, tol=1e-10)
        assert entry.alpha_lo <= hi and lo <= entry.alpha_hi  # overlap
        assert entry.midpoint == pytest.approx(0.5 * (lo + hi), rel=1e-9)


def test_shallowest_exponent_bracket_matches_oracle():
    fl = FieldParams(3, 1.2)
    entry = find_alpha_k(fl, 0, tol=1e-10)
    lo, hi = BRACKET_3_12[0]
    assert entry.midpoint == pytest.approx(0.5 * (lo + hi), rel=1e-9)
    entry1 = find_alpha_k(fl, 1, tol=1e-10)
    assert entry1.midpoint == pytest.approx(MID_3_12_K1, rel=1e-9)


def test_four_dimensional_brackets_match_oracle():
    fl = FieldParams(4, 2.0)
    for k, (lo, hi) in BRACKET_42.items():
        entry = find_alpha_k(fl, k, tol=1e-10)
        assert entry.midpoint == pytest.approx(0.5 * (lo + hi), rel=1e-9)


def test_class_tags(field33):
    assert classify(field33, 1.0).tag == CONSTANT
    low = classify(field33, 0.5)
    assert low.tag == OSCILLATORY
    assert low.node_count == 0
    assert low.witness.energy_nonpositive_radius is not None
    mid = classify(field33, 5.0)
    assert mid.tag == OSCILLATORY
    assert mid.node_count == 1
    assert mid.oscillation_center in (-1, 1)


def test_bracket_midpoint_classifies_as_a_candidate(field33, ladder33):
    # at r = 12 the midpoint still shadows the bound state: |u| ~ 1.4e-6
    # and slope error ~ 0.085 (~1/r).  Farther out the bisection offset
    # has grown like e^r and poisons the slope before the energy trap.
    alpha = ladder33.entry(0).midpoint
    result = classify(field33, alpha, IntegratorControls().with_rmax(12.0),
                      decay_eps=1e-5, slope_eps=0.1)
    assert result.tag == BOUND_STATE_CANDIDATE
    assert result.node_count == 0
    assert result.witness.decay_slope_error is not None
    assert result.witness.decay_slope_error < 0.1


def test_node_counts_step_up_through_the_ladder(field33):
    assert node_count_of_alpha(field33, 3.0).count == 0
    assert node_count_of_alpha(field33, 5.0).count == 1
    assert node_count_of_alpha(field33, 15.0).count == 2
    assert node_count_of_alpha(field33, 30.0).count == 3
    assert node_count_of_alpha(field33, 5.0).final


def test_bracket_search_gives_up_at_the_expansion_cap(field33):
    with pytest.raises(BracketNotFound):
        find_alpha_k(field33, 0, expansion_cap=1.5)


def test_bracket_tolerance_must_be_positive(field33):
    with pytest.raises(ValueError):
        find_alpha_k(field33, 0, tol=0.0)
    with pytest.raises(ValueError):
        find_alpha_k(field33, -1)


def test_first_zero_decreases_with_amplitude(field33):
    report = zero_monotonicity_scan(field33, [5.0, 6.0, 8.0, 10.0, 15.0])
    assert report.strictly_decreasing
    assert report.violations == ()
    zs = report.first_zeros
    assert all(z is not None for z in zs)
    assert all(b < a for a, b in zip(zs, zs[1:]))
