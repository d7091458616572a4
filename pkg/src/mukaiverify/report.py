"""Verification reports: one row per checked claim.

Statuses: ``pass``, ``fail``, ``inconclusive`` and ``info``.  ``info`` rows
record a computed value next to a conflicting reference one; they never
affect the exit status.
"""

from __future__ import annotations

import json
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from . import __version__

STATUSES = ("pass", "fail", "inconclusive", "info")


def _jsonable(v):
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else str(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if hasattr(v, "item"):  # numpy scalars
        return v.item()
    return v


@dataclass
class Row:
    claim: str
    location: str
    expected: object
    source: str  # "reference", "derived" or "identity"
    computed: object
    status: str
    millis: float = 0.0
    detail: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        self.expected = _jsonable(self.expected)
        self.computed = _jsonable(self.computed)

    def as_dict(self, timings: bool = True) -> dict:
        d = asdict(self)
        if not timings:
            d.pop("millis")
        return d


@dataclass
class Report:
    scenario: str
    seed: int = 0
    prime: int = 10007
    rows: list[Row] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, claim, location, expected, computed, source="reference", status=None,
            millis=0.0, detail="") -> Row:
        if status is None:
            status = "pass" if _jsonable(expected) == _jsonable(computed) else "fail"
        row = Row(claim, location, expected, source, computed, status, round(millis, 3), detail)
        self.rows.append(row)
        return row

    def check(self, claim, location, expected, source="reference", detail=""):
        """Context manager timing a computation; call ``set(value)`` inside."""
        return _Timed(self, claim, location, expected, source, detail)

    def extend(self, other: "Report"):
        self.rows.extend(other.rows)
        self.meta.update(other.meta)

    @property
    def status(self) -> str:
        s = [r.status for r in self.rows]
        if "fail" in s:
            return "fail"
        if "inconclusive" in s:
            return "inconclusive"
        return "pass"

    @property
    def exit_code(self) -> int:
        return {"pass": 0, "fail": 1, "inconclusive": 2}[self.status]

    def counts(self) -> dict:
        return {k: sum(r.status == k for r in self.rows) for k in STATUSES}

    def to_jsonl(self, timings: bool = True) -> str:
        head = {"scenario": self.scenario, "seed": self.seed, "prime": self.prime,
                "version": __version__, **_jsonable(self.meta)}
        lines = [json.dumps({"meta": head}, sort_keys=True)]
        lines += [json.dumps(r.as_dict(timings), sort_keys=True) for r in self.rows]
        return "\n".join(lines) + "\n"

    def to_text(self, timings: bool = True) -> str:
        out = [f"scenario {self.scenario}  seed {self.seed}  prime {self.prime}  version {__version__}"]
        width = max((len(r.claim) for r in self.rows), default=10)
        for r in self.rows:
            t = f"  {r.millis:9.1f} ms" if timings else ""
            line = (f"{r.status.upper():12s} {r.claim.ljust(width)}  expected={r.expected!s:<14} "
                    f"computed={r.computed!s:<14} [{r.source}] {r.location}{t}")
            if r.detail:
                line += f"  ({r.detail})"
            out.append(line)
        c = self.counts()
        out.append(f"overall {self.status}: {c['pass']} pass, {c['fail']} fail, "
                   f"{c['inconclusive']} inconclusive, {c['info']} info")
        return "\n".join(out) + "\n"


class _Timed:
    def __init__(self, report, claim, location, expected, source, detail):
        self.report = report
        self.args = (claim, location, expected)
        self.source = source
        self.detail = detail
        self.value = None
        self.status = None

    def set(self, value, status=None, detail=None):
        self.value = value
        self.status = status
        if detail is not None:
            self.detail = detail

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        ms = (time.perf_counter() - self.t0) * 1000
        claim, location, expected = self.args
        if exc_type is not None and issubclass(exc_type, Exception):
            self.report.add(claim, location, expected, f"error: {exc}", self.source, "fail", ms)
            return True
        self.report.add(claim, location, expected, self.value, self.source, self.status, ms, self.detail)
        return False


@contextmanager
def stopwatch():
    box = {}
    t0 = time.perf_counter()
    yield box
    box["ms"] = (time.perf_counter() - t0) * 1000
