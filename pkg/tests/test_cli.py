import json
import subprocess
import sys

import pytest

from mukaiverify import chow
from mukaiverify.cli import EXIT_USAGE, main


def test_chow_text_report(capsys):
    assert main(["scenario", "chow", "--genus", "7"]) == 0
    out = capsys.readouterr().out
    assert "g7.E^4" in out and "-149" in out
    assert out.splitlines()[-1].startswith("overall pass")


def test_jsonl_to_file(tmp_path, capsys):
    path = tmp_path / "r.jsonl"
    code = main(["scenario", "chow", "--genus", "8", "--format", "jsonl", "--out", str(path), "--no-timings"])
    assert code == 0
    rows = [json.loads(l) for l in path.read_text().splitlines()]
    assert rows[0]["meta"]["scenario"] == "chow"
    assert all("millis" not in r for r in rows[1:])
    assert capsys.readouterr().out.startswith("overall pass")


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"genus": 9, "seed": 4, "sweep-bound": 5}))
    out = tmp_path / "r.jsonl"
    assert main(["scenario", "chow", "--config", str(cfg), "--seed", "7", "--format", "jsonl",
                 "--out", str(out)]) == 0
    meta = json.loads(out.read_text().splitlines()[0])["meta"]
    assert (meta["genus"], meta["seed"], meta["sweep_bound"]) == (9, 7, 5)


@pytest.mark.parametrize("argv", [
    ["scenario", "chow", "--genus", "11"],
    ["scenario", "chow", "--prime", "100"],
    ["scenario", "covering", "--samples", "0"],
    ["scenario", "chow", "--config", "/nonexistent/config.json"],
])
def test_usage_errors_exit_3(argv, capsys):
    assert main(argv) == EXIT_USAGE
    assert "error" in capsys.readouterr().err


def test_parse_errors_exit_3(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["scenario", "bogus"])
    assert exc.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == EXIT_USAGE


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"colour": "red"}))
    assert main(["scenario", "chow", "--config", str(cfg)]) == EXIT_USAGE


def test_failing_claim_exits_1(monkeypatch, capsys):
    monkeypatch.setitem(chow.REFERENCE_ROWS, 7, (-8, -42, -150, 1, 4, 11))
    assert main(["scenario", "chow", "--genus", "7"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_inconclusive_exits_2(capsys):
    assert main(["scenario", "covering", "--points", "1", "--sweep-bound", "3"]) == 2
    assert "INCONCLUSIVE" in capsys.readouterr().out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mukaiverify", "scenario", "chow", "--genus", "10"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "g10.Lbar^4" in proc.stdout
