import json
from fractions import Fraction

import numpy as np
import pytest

from mukaiverify.report import Report, Row


def test_status_precedence_and_exit_codes():
    r = Report("x")
    r.add("a", "here", 1, 1)
    assert (r.status, r.exit_code) == ("pass", 0)
    r.add("b", "here", 1, 2, status="info")
    assert r.exit_code == 0
    r.add("c", "here", "empty", "inconclusive", status="inconclusive")
    assert (r.status, r.exit_code) == ("inconclusive", 2)
    r.add("d", "here", 1, 2)
    assert (r.status, r.exit_code) == ("fail", 1)
    assert r.counts() == {"pass": 1, "fail": 1, "inconclusive": 1, "info": 1}


def test_values_are_json_ready():
    r = Report("x")
    r.add("a", "here", Fraction(4), np.int64(4))
    r.add("b", "here", Fraction(1, 2), "1/2")
    assert [row.status for row in r.rows] == ["pass", "pass"]
    lines = r.to_jsonl().splitlines()
    assert json.loads(lines[0])["meta"]["scenario"] == "x"
    assert json.loads(lines[1])["expected"] == 4


def test_timings_excluded_on_request():
    r = Report("x")
    r.add("a", "here", 1, 1, millis=12.5)
    assert "millis" in json.loads(r.to_jsonl().splitlines()[1])
    assert "millis" not in json.loads(r.to_jsonl(timings=False).splitlines()[1])
    assert "ms" not in r.to_text(timings=False).splitlines()[1]


def test_check_context_records_errors_as_failures():
    r = Report("x")
    with r.check("boom", "here", 1) as c:
        raise RuntimeError("no")
    assert r.rows[0].status == "fail" and "no" in r.rows[0].computed
    with r.check("ok", "here", 3) as c:
        c.set(3)
    assert r.rows[1].status == "pass" and r.rows[1].millis >= 0


def test_unknown_status_rejected():
    with pytest.raises(ValueError):
        Row("a", "b", 1, "reference", 1, "maybe")


def test_text_summary_line():
    r = Report("x")
    r.add("a", "here", 1, 1)
    assert r.to_text().splitlines()[-1] == "overall pass: 1 pass, 0 fail, 0 inconclusive, 0 info"
