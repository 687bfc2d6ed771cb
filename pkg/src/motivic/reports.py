"""Structured pass/fail reports shared by verification routines."""

from __future__ import annotations

import time
from dataclasses import dataclass, field


@dataclass
class Check:
    label: str
    passed: bool
    detail: str = ""

    def to_json(self):
        return {"label": self.label, "passed": self.passed, "detail": self.detail}


@dataclass
class VerificationReport:
    name: str
    checks: list = field(default_factory=list)
    params: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    elapsed: float = 0.0
    data: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def add(self, label, passed, detail=""):
        self.checks.append(Check(label, bool(passed), str(detail)))
        return bool(passed)

    def merge(self, other, prefix=""):
        for c in other.checks:
            self.checks.append(Check(prefix + c.label, c.passed, c.detail))
        self.notes.extend(other.notes)

    def to_json(self):
        return {"name": self.name, "passed": self.passed, "elapsed_s": round(self.elapsed, 4),
                "params": self.params, "notes": self.notes, "data": self.data,
                "checks": [c.to_json() for c in self.checks]}

    def summary(self):
        ok = sum(c.passed for c in self.checks)
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {ok}/{len(self.checks)} checks ({self.elapsed:.2f}s)"


class timed:
    """Context manager filling ``report.elapsed``."""

    def __init__(self, report):
        self.report = report

    def __enter__(self):
        self._t0 = time.perf_counter()
        return self.report

    def __exit__(self, *exc):
        self.report.elapsed += time.perf_counter() - self._t0
        return False
