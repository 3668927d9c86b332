"""Machine-readable check reports shared by the validators and the CLI."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

__all__ = ["CheckResult", "CheckReport", "significant"]


def significant(x: float, digits: int = 12) -> str:
    """Fixed significant-digit decimal rendering used by every report."""
    return format(float(x), f".{digits}g")


@dataclass(frozen=True)
class CheckResult:
    """One named check: what was measured against which tolerance."""

    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "passed": bool(self.passed),
            "measured": significant(self.measured),
            "tolerance": significant(self.tolerance),
        }
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class CheckReport:
    """Ordered collection of check results."""

    checks: list = field(default_factory=list)

    def add(self, name, passed, measured, tolerance, detail="") -> CheckResult:
        result = CheckResult(name, bool(passed), float(measured), float(tolerance), detail)
        self.checks.append(result)
        return result

    def extend(self, other: "CheckReport") -> None:
        self.checks.extend(other.checks)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }

    def to_json(self, indent=2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=False)
