"""Structured verification reports shared by the verifiers and the CLI.

The machine format is JSON with sorted keys and no timing data, so that the
same document and seed always give byte-identical output.  Timings appear
only in the text rendering.
"""

from __future__ import annotations

import json
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

SCHEMA_VERSION = 1


@dataclass
class Check:
    name: str
    passed: bool
    witness: dict[str, str] | None = None
    detail: str = ""
    count: int = 0
    seconds: float = 0.0

    def to_dict(self) -> dict:
        out = {"name": self.name, "status": "pass" if self.passed else "fail",
               "instances": self.count}
        if self.detail:
            out["detail"] = self.detail
        if self.witness:
            out["witness"] = dict(self.witness)
        return out


@dataclass
class Report:
    command: str
    checks: list[Check] = field(default_factory=list)
    values: dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def summary(self) -> str:
        return f"{sum(c.passed for c in self.checks)}/{len(self.checks)}"

    def add(self, name: str, passed: bool, witness=None, detail: str = "",
            count: int = 0, seconds: float = 0.0) -> Check:
        c = Check(name, bool(passed), witness, detail, count, seconds)
        self.checks.append(c)
        return c

    def extend(self, other: Report, prefix: str = ""):
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.passed, c.witness, c.detail,
                                     c.count, c.seconds))

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def get(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "command": self.command,
                "summary": self.summary, "ok": self.ok, "values": dict(self.values),
                "checks": [c.to_dict() for c in self.checks]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_text(self, timings: bool = True) -> str:
        lines = [f"# {self.command}"]
        for k in sorted(self.values):
            lines.append(f"{k} = {self.values[k]}")
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            extra = f" ({c.count} instances" + (f", {c.seconds:.2f}s)" if timings else ")")
            lines.append(f"{status} {c.name}{extra}")
            if c.detail:
                lines.append(f"  {c.detail}")
            if c.witness:
                for k in sorted(c.witness):
                    lines.append(f"  {k} = {c.witness[k]}")
        lines.append(f"summary: {self.summary}")
        return "\n".join(lines) + "\n"


class Tally:
    """Counts instances of one check and keeps the first failure."""

    def __init__(self):
        self.count = 0
        self.witness: dict[str, str] | None = None
        self.detail = ""

    def record(self, ok: bool, witness=None, detail: str = "") -> bool:
        self.count += 1
        if not ok and self.witness is None:
            self.witness = witness() if callable(witness) else (witness or {})
            self.detail = detail
        return ok

    @property
    def passed(self) -> bool:
        return self.witness is None


@contextmanager
def timed_check(report: Report, name: str):
    """Run a block that fills a :class:`Tally`, then append the result."""
    tally = Tally()
    start = time.perf_counter()
    yield tally
    report.add(name, tally.passed, tally.witness, tally.detail, tally.count,
               time.perf_counter() - start)
