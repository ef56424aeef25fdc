"""Serialization tests: 17-digit round-trips, config echo, portrait JSON."""

import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from boundstate_lab import (
    FULL_RANGE_POLICY,
    FieldParams,
    IntegratorControls,
    ProblemParams,
    critical_amplitudes,
    detect_events,
    integrate,
)
from boundstate_lab.io import (
    SCHEMA,
    ConfigSyntaxError,
    artifact,
    cell,
    csv_text,
    fnum,
    json_text,
    parse_config_text,
    phase_from_dict,
    phase_to_dict,
    point_from_dict,
    point_to_dict,
    portrait_from_dict,
    portrait_to_dict,
    trajectory_csv,
    verification_table,
)
from boundstate_lab.portrait import LabeledPoint, PhaseLabels
from boundstate_lab.verify import CheckRecord, VerificationReport

finite_floats = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(x=finite_floats)
def test_seventeen_digit_rendering_round_trips(x):
    assert float(fnum(x)) == x


def test_cell_rendering():
    assert cell(None) == ""
    assert cell(True) == "true"
    assert cell(3) == "3"
    assert cell(0.1) == "0.10000000000000001"
    assert cell("tag") == "tag"


def test_csv_text_layout():
    text = csv_text(("a", "b"), [(1, 2.5), (3, None)], {"n": 3, "p": 3.0})
    lines = text.splitlines()
    assert lines[0] == f"# schema={SCHEMA}"
    assert lines[1] == "# n=3"
    assert lines[2] == "# p=3"
    assert lines[3] == "a,b"
    assert lines[4] == "1,2.5"
    assert lines[5] == "3,"


def test_csv_text_rejects_ragged_rows():
    with pytest.raises(ValueError):
        csv_text(("a", "b"), [(1,)], {})


def test_json_text_is_sorted_and_newline_terminated():
    text = json_text({"b": 1, "a": 2})
    assert text.endswith("\n")
    assert text.index('"a"') < text.index('"b"')
    assert json_text({"b": 1, "a": 2}) == text


def test_artifact_envelope():
    payload = artifact({"rows": []}, {"n": 3})
    assert payload["schema"] == SCHEMA
    assert payload["config"] == {"n": 3}
    with pytest.raises(ValueError):
        artifact({"config": {}}, {"n": 3})


def test_config_parsing():
    text = "# comment\n\n n = 3\np=3.0\nout=run/a\nn=4\n"
    cfg = parse_config_text(text)
    assert cfg == {"n": "4", "p": "3.0", "out": "run/a"}
    with pytest.raises(ConfigSyntaxError):
        parse_config_text("just words\n")
    with pytest.raises(ConfigSyntaxError):
        parse_config_text("=value\n")


points = st.one_of(
    st.none(),
    st.builds(LabeledPoint, r=finite_floats, value=finite_floats),
)


@given(b=points, r=points, z=points,
       idx=st.integers(min_value=1, max_value=9),
       uncertain=st.lists(st.sampled_from(["b", "r", "z", "rbar", "bbar"]),
                          max_size=3).map(tuple))
def test_phase_labels_round_trip(b, r, z, idx, uncertain):
    ph = PhaseLabels(index=idx, b=b, r=r, z=z, rbar=None, bbar=b,
                     uncertain=uncertain)
    again = phase_from_dict(json.loads(json.dumps(phase_to_dict(ph))))
    assert again == ph


@given(pt=points)
def test_point_round_trip(pt):
    again = point_from_dict(json.loads(json.dumps(point_to_dict(pt))))
    assert again == pt


def test_portrait_round_trips_field_for_field():
    fl = FieldParams(3, 3.0)
    traj = integrate(ProblemParams(fl, 5.0, IntegratorControls().with_rmax(30.0)),
                     FULL_RANGE_POLICY)
    portrait = detect_events(traj, critical_amplitudes(fl))
    text = json.dumps(portrait_to_dict(portrait), indent=2, sort_keys=True)
    again = portrait_from_dict(json.loads(text))
    assert again == portrait


def test_trajectory_csv_has_one_row_per_sample():
    fl = FieldParams(3, 3.0)
    traj = integrate(ProblemParams(fl, 2.0, IntegratorControls().with_rmax(5.0)),
                     FULL_RANGE_POLICY)
    text = trajectory_csv(traj, {"alpha": 2.0})
    rows = [line for line in text.splitlines() if not line.startswith("#")]
    assert rows[0] == "r,u,up,v,vp"
    assert len(rows) - 1 == len(traj.knots)
    first = rows[1].split(",")
    assert float(first[0]) == traj.r_start
    assert float(first[1]) == traj.states[0][0]


def test_verification_table_lists_every_record():
    report = VerificationReport((
        CheckRecord("energy_monotone", "CaseA", "pass", 0.25, 40, ""),
        CheckRecord("tango", "CaseB", "fail", -0.5, 3, "broke"),
        CheckRecord("tango", "CaseC", "skipped-undefined", None, 0, "n/a"),
    ))
    table = verification_table(report)
    lines = table.splitlines()
    assert len(lines) == 1 + 3 + 1  # header, records, verdict
    assert "FAIL" in lines[-1]
    assert any("broke" in line for line in lines)


def test_nonfinite_margins_degrade_to_null_in_json():
    from boundstate_lab.io import record_to_dict

    rec = CheckRecord("v_divergence", "CaseA", "pass", math.inf, 1, "guard trip")
    assert record_to_dict(rec)["margin"] is None
    assert json.loads(json_text({"m": record_to_dict(rec)["margin"]}))["m"] is None
