import json
import os
from pathlib import Path

import pytest

from mukaiverify import chow
from mukaiverify.scenarios import ScenarioConfig, run_scenario

GOLDEN = Path(__file__).parent / "golden"
REGEN = os.environ.get("MUKAIVERIFY_REGEN") == "1"

CASES = {
    "chow": ScenarioConfig("chow"),
    "linkage_g7_seed1": ScenarioConfig("linkage", genus=7, seed=1),
    "linkage_g9": ScenarioConfig("linkage", genus=9),
    "lines": ScenarioConfig("lines"),
    "cremona": ScenarioConfig("cremona", samples=100),
}


def _body(cfg):
    return run_scenario(cfg).to_jsonl(timings=False)


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden_report(name):
    body = _body(CASES[name])
    path = GOLDEN / f"{name}.jsonl"
    if REGEN or not path.exists():
        path.parent.mkdir(exist_ok=True)
        path.write_text(body)
        if not REGEN:
            pytest.fail(f"golden file {path.name} was missing and has been written; rerun")
    assert body == path.read_text()


def test_reports_are_byte_identical_across_runs():
    cfg = ScenarioConfig("linkage", genus=8, seed=2)
    assert _body(cfg) == _body(cfg)


def test_rows_carry_locations_and_sources():
    rep = run_scenario(ScenarioConfig("chow", genus=10))
    assert len(rep.rows) >= 15
    for row in rep.rows:
        assert row.location and row.source in ("reference", "derived", "identity")
    claims = [r.claim for r in rep.rows]
    assert len(claims) == len(set(claims))


def test_chow_genus7_has_e4():
    rep = run_scenario(ScenarioConfig("chow", genus=7))
    row = next(r for r in rep.rows if r.claim == "g7.E^4")
    assert (row.expected, row.computed, row.status) == (-149, -149, "pass")


def test_wrong_reference_value_fails(monkeypatch):
    monkeypatch.setitem(chow.REFERENCE_ROWS, 9, (-4, -6, -2, 1, 3, 15))
    rep = run_scenario(ScenarioConfig("chow", genus=9))
    assert rep.status == "fail"
    assert [r.claim for r in rep.rows if r.status == "fail"] == ["g9.E^4", "g9.surface.E^4"]


def test_linear_system_scenario():
    rep = run_scenario(ScenarioConfig("linear-system"))
    by = {r.claim: r for r in rep.rows}
    assert by["g7.linear_system.dimension"].computed == 10
    assert by["g7.linear_system.saturated_square"].status == "pass"
    assert by["g7.linear_system.ordinary_square"].computed == 9
    assert by["g7.linear_system.points"].computed == 50
    assert rep.status == "pass"


def test_covering_short_sweep_is_inconclusive():
    rep = run_scenario(ScenarioConfig("covering", points=1, sweep_bound=3))
    row = rep.rows[-1]
    assert row.claim == "g7.covering.empty"
    assert row.status == "inconclusive"
    assert rep.exit_code == 2


def test_genus10_linkage_betti_is_info():
    rep = run_scenario(ScenarioConfig("linkage", genus=10))
    row = next(r for r in rep.rows if r.claim == "g10.F.betti")
    assert row.status == "info"
    assert row.computed == "0: 1 1 . . . . / 1: . 9 25 25 9 . / 2: . . . . 1 1"
    assert rep.status == "pass"


@pytest.mark.parametrize("kw", [dict(scenario="nope"), dict(scenario="chow", genus=6),
                                dict(scenario="covering", genus=8), dict(scenario="chow", prime=10005),
                                dict(scenario="chow", samples=0)])
def test_invalid_configs(kw):
    with pytest.raises(ValueError):
        run_scenario(ScenarioConfig(**kw))


def test_jsonl_rows_parse():
    text = run_scenario(ScenarioConfig("chow", genus=8)).to_jsonl()
    lines = [json.loads(l) for l in text.splitlines()]
    assert lines[0]["meta"]["seed"] == 0
    assert {"claim", "location", "expected", "source", "computed", "status", "millis"} <= set(lines[1])
