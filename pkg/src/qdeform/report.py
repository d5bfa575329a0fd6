"""Check records and verification reports."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Check:
    name: str
    anchor: str
    defect: float
    tolerance: float

    @property
    def passed(self) -> bool:
        # NaN defects never pass
        return self.defect <= self.tolerance

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "paper_anchor": self.anchor,
            "defect": self.defect,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


@dataclass
class Report:
    suite: str
    checks: list[Check] = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def add(self, name: str, anchor: str, defect: float, tolerance: float) -> Check:
        c = Check(name, anchor, float(defect), float(tolerance))
        self.checks.append(c)
        return c

    def extend(self, checks: Iterable[Check], prefix: str = "") -> None:
        for c in checks:
            self.checks.append(Check(prefix + c.name, c.anchor, c.defect, c.tolerance))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "pass": self.passed,
            "checks": [c.as_dict() for c in self.checks],
            "notes": self.notes,
        }


def dumps(doc: dict) -> str:
    """Deterministic JSON: sorted keys, floats with 17 significant digits."""

    def enc(o):
        if isinstance(o, float):
            if o != o or o in (float("inf"), float("-inf")):
                return json.dumps(str(o))
            return format(o, ".17g")
        if isinstance(o, bool) or o is None:
            return json.dumps(o)
        if isinstance(o, int):
            return str(o)
        if isinstance(o, str):
            return json.dumps(o)
        if isinstance(o, dict):
            items = sorted(o.items())
            return "{" + ", ".join(f"{json.dumps(str(k))}: {enc(v)}" for k, v in items) + "}"
        if isinstance(o, (list, tuple)):
            return "[" + ", ".join(enc(v) for v in o) + "]"
        raise TypeError(f"cannot serialise {type(o).__name__}")

    return enc(doc)


def table(reports: Iterable[Report]) -> str:
    lines = []
    for r in reports:
        lines.append(f"== {r.suite}: {'PASS' if r.passed else 'FAIL'}")
        for c in r.checks:
            mark = "ok " if c.passed else "BAD"
            lines.append(f"  [{mark}] {c.name:<58} {c.defect:10.3e} <= {c.tolerance:.1e}")
    return "\n".join(lines)
