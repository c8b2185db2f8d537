"""Shared result record for the numerical certification suites."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

__all__ = ["CheckReport"]


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item") and not hasattr(x, "__len__"):
        return x.item()
    if hasattr(x, "tolist"):
        return x.tolist()
    return x


@dataclass
class CheckReport:
    """Outcome of one verification suite.

    violations counts samples that broke an asserted inequality beyond its
    stated numerical slack; max_slack is the largest signed slack seen
    (positive means the inequality came closest to failing, or failed);
    worst_case serializes the inputs that produced max_slack.  details
    carries suite-specific fitted constants and measurements.
    """

    lemma_id: str
    samples_run: int
    violations: int
    max_slack: float
    worst_case: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {
            "lemma_id": self.lemma_id,
            "samples_run": int(self.samples_run),
            "violations": int(self.violations),
            "max_slack": float(self.max_slack),
            "worst_case": _jsonable(self.worst_case),
            "details": _jsonable(self.details),
            "passed": self.passed,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def merge(self, other: "CheckReport") -> "CheckReport":
        """Combine two partial reports of the same suite."""
        if other.lemma_id != self.lemma_id:
            raise ValueError("cannot merge reports of different checks")
        take_other = other.max_slack > self.max_slack
        return CheckReport(
            lemma_id=self.lemma_id,
            samples_run=self.samples_run + other.samples_run,
            violations=self.violations + other.violations,
            max_slack=max(self.max_slack, other.max_slack),
            worst_case=other.worst_case if take_other else self.worst_case,
            details={**self.details, **other.details},
        )
