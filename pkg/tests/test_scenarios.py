"""Scenario files: schema, verification pipeline, reports, emission."""

import json

import pytest

from foliavg.errors import (
    InvariantViolation,
    ParseError,
    SchemaError,
    UnknownFormat,
)
from foliavg.scenarios import (
    STAGE_NAMES,
    averaged_scenario,
    bundled_names,
    generator_table,
    load_scenario,
    render_report,
    run_checks,
    scenario_from_dict,
)

BUNDLED = ["ext3", "ext3adm", "hb4d", "hb4d_inv", "t2pairs", "triv", "triv_shifted"]

EXPECTED_FAILURES = {
    "triv": set(),
    "hb4d": set(),
    "hb4d_inv": set(),
    "ext3": {("curvature_form", "admissible"), ("dirac", "involutive")},
    "ext3adm": set(),
    "t2pairs": set(),
    "triv_shifted": {("adiabatic", "horizontal_momentum_average")},
}


def test_bundled_names():
    assert bundled_names() == BUNDLED


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_scenario_verdicts(name):
    report = run_checks(load_scenario(name))
    failed = {(c.stage, c.check) for c in report.checks if not c.passed}
    assert failed == EXPECTED_FAILURES[name]
    assert report.failures == len(EXPECTED_FAILURES[name])
    assert report.all_passed == (not EXPECTED_FAILURES[name])


def test_stage_names_are_canonical():
    assert STAGE_NAMES == (
        "connection",
        "poisson",
        "action",
        "premomentum",
        "averaging",
        "curvature_form",
        "averaged_form",
        "adiabatic",
        "dirac",
    )


# ----------------------------------------------------------------------
# reports


def test_json_report_shape():
    report = run_checks(load_scenario("hb4d"))
    doc = json.loads(render_report(report, "json", witness=True))
    assert doc["schema"] == 1
    assert doc["scenario"] == "hb4d"
    assert doc["failures"] == 0
    assert isinstance(doc["elapsed_ms"], (int, float))
    assert all("witness" in c for c in doc["checks"])
    plain = json.loads(render_report(report, "json"))
    assert all("witness" not in c for c in plain["checks"])


def test_text_report_shape():
    report = run_checks(load_scenario("hb4d"))
    text = render_report(report, "text")
    lines = text.splitlines()
    assert lines[0].startswith("scenario hb4d: 23 checks, all passed")
    assert "✓ poisson: jacobi" in text
    failing = run_checks(load_scenario("ext3"))
    text = render_report(failing, "text", witness=True)
    assert "✗ curvature_form: admissible" in text
    assert "witness:" in text


def test_unknown_format_rejected():
    report = run_checks(load_scenario("triv"))
    with pytest.raises(UnknownFormat):
        render_report(report, "yaml")


def test_report_is_deterministic():
    a = json.loads(render_report(run_checks(load_scenario("hb4d")), "json", witness=True))
    b = json.loads(render_report(run_checks(load_scenario("hb4d")), "json", witness=True))
    a.pop("elapsed_ms")
    b.pop("elapsed_ms")
    assert a == b


# ----------------------------------------------------------------------
# stage selection and skipping


def test_stage_selection_keeps_canonical_order():
    report = run_checks(load_scenario("hb4d"), ["poisson", "connection"])
    assert report.stages == ("connection", "poisson")
    assert {c.stage for c in report.checks} == {"connection", "poisson"}


def test_unknown_stage_rejected():
    with pytest.raises(SchemaError):
        run_checks(load_scenario("hb4d"), ["nope"])


def momenta_free_scenario():
    raw = dict(load_scenario("triv").raw)
    raw.pop("momenta")
    raw["name"] = "triv_nomu"
    return scenario_from_dict(raw)


def test_momentum_stages_skip_without_momenta():
    report = run_checks(momenta_free_scenario())
    assert {stage for stage, _ in report.skipped} == {
        "premomentum",
        "averaged_form",
        "adiabatic",
        "dirac",
    }
    assert report.all_passed
    doc = json.loads(render_report(report, "json"))
    assert {entry["stage"] for entry in doc["skipped"]} == {
        "premomentum",
        "averaged_form",
        "adiabatic",
        "dirac",
    }


def test_explicit_momentum_stage_errors_without_momenta():
    with pytest.raises(SchemaError):
        run_checks(momenta_free_scenario(), ["premomentum"])


# ----------------------------------------------------------------------
# averaged emission


def test_averaged_emission_round_trip():
    out = averaged_scenario(load_scenario("hb4d"))
    assert out["name"] == "hb4d_averaged"
    assert out["connection"] == {"frame": {}}
    assert out["potential"] == {"x1": "-q*x2"}
    assert out["pairing_form"] == {}
    report = run_checks(scenario_from_dict(out))
    assert report.all_passed


def test_averaged_emission_carries_fixed_momenta():
    out = averaged_scenario(load_scenario("triv_shifted"))
    assert "primitives" not in out
    report = run_checks(scenario_from_dict(out))
    assert report.all_passed


def test_averaged_emission_needs_momenta():
    with pytest.raises(SchemaError):
        averaged_scenario(momenta_free_scenario())


# ----------------------------------------------------------------------
# generator tables


def test_generator_table_on_trivial_scenario():
    table = generator_table(load_scenario("triv"))
    assert table["schema"] == 1
    assert table["scenario"] == "triv"
    assert table["generators"] == [
        {"field": {"x1": "1"}, "form": {}},
        {"field": {"x2": "1"}, "form": {}},
        {"field": {"p": "1"}, "form": {"q": "1"}},
        {"field": {"q": "-1"}, "form": {"p": "1"}},
    ]


def test_generator_table_counts_match_dimension():
    for name in BUNDLED:
        scenario = load_scenario(name)
        table = generator_table(scenario)
        assert len(table["generators"]) == scenario.chart.dim


# ----------------------------------------------------------------------
# loading


def test_load_from_path(tmp_path):
    raw = dict(load_scenario("triv").raw)
    raw["name"] = "copy"
    path = tmp_path / "copy.json"
    path.write_text(json.dumps(raw))
    assert load_scenario(str(path)).name == "copy"


def test_unknown_source_lists_bundled_names():
    with pytest.raises(SchemaError) as info:
        load_scenario("missing_scenario")
    assert "bundled" in str(info.value)


def test_malformed_json_is_a_parse_error(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{nope")
    with pytest.raises(ParseError):
        load_scenario(str(path))


# ----------------------------------------------------------------------
# schema validation


def test_unknown_top_level_key_rejected():
    bad = dict(load_scenario("triv").raw)
    bad["extra"] = 1
    with pytest.raises(SchemaError):
        scenario_from_dict(bad)


def test_schema_version_checked():
    bad = dict(load_scenario("triv").raw)
    bad["schema"] = 2
    with pytest.raises(SchemaError):
        scenario_from_dict(bad)


def test_momenta_count_must_match_factors():
    bad = dict(load_scenario("t2pairs").raw)
    bad["momenta"] = bad["momenta"][:1]
    with pytest.raises(SchemaError):
        scenario_from_dict(bad)


def test_parse_errors_name_the_field():
    bad = dict(load_scenario("triv").raw)
    bad["poisson"] = {"q^p": "1 +* 2"}
    with pytest.raises(ParseError) as info:
        scenario_from_dict(bad)
    assert str(info.value).startswith("poisson.q^p")


def test_bad_projection_rejected():
    bad = dict(load_scenario("triv").raw)
    bad["connection"] = {
        "projection": {"q": {"q": "1", "p": "q"}, "p": {"p": "1"}}
    }
    with pytest.raises(InvariantViolation) as info:
        scenario_from_dict(bad)
    assert str(info.value).startswith("connection.projection")


def test_projection_form_equals_frame_form():
    good = dict(load_scenario("hb4d").raw)
    good["connection"] = {
        "projection": {"q": {"q": "1"}, "p": {"p": "1"}, "x1": {"p": "-x2"}}
    }
    assert scenario_from_dict(good).conn == load_scenario("hb4d").conn
