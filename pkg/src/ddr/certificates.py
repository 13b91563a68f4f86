"""Machine-checkable verdicts and the report container.

A certificate couples a verdict with the evidence that justifies it; the
evidence is always enough for the owning module to re-run its verification.
Reports are deterministic for a fixed input and configuration: no clocks,
no environment-dependent fields.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

CERTIFIED_DR_AWAY_FROM = "CERTIFIED_DR_AWAY_FROM"
CERTIFIED_DR_ALL_DIRECTIONS = "CERTIFIED_DR_ALL_DIRECTIONS"
DECIDED_DR = "DECIDED_DR"
DECIDED_NOT_DR = "DECIDED_NOT_DR"
REFUTED = "REFUTED"
UNKNOWN = "UNKNOWN"

POSITIVE_VERDICTS = frozenset({CERTIFIED_DR_AWAY_FROM, CERTIFIED_DR_ALL_DIRECTIONS, DECIDED_DR})
NEGATIVE_VERDICTS = frozenset({DECIDED_NOT_DR, REFUTED})


@dataclass
class Certificate:
    presentation_digest: str
    subset: tuple[str, ...] | None  # sorted; None for all-directions claims
    verdict: str
    method: str
    evidence: dict = field(default_factory=dict)
    consequences: list[dict] = field(default_factory=list)
    notes: tuple[str, ...] = ()

    @property
    def positive(self) -> bool:
        return self.verdict in POSITIVE_VERDICTS

    @property
    def negative(self) -> bool:
        return self.verdict in NEGATIVE_VERDICTS

    def to_json_dict(self) -> dict:
        return {
            "presentation": self.presentation_digest,
            "subset": list(self.subset) if self.subset is not None else None,
            "verdict": self.verdict,
            "method": self.method,
            "evidence": self.evidence,
            "consequences": self.consequences,
            "notes": list(self.notes),
        }


@dataclass
class Report:
    tool_version: str
    input_description: dict
    config: dict
    certificates: list[Certificate] = field(default_factory=list)
    attempts: list[dict] = field(default_factory=list)
    schema: int = 1

    def to_json_dict(self) -> dict:
        return {
            "schema": self.schema,
            "tool": {"name": "ddr", "version": self.tool_version},
            "input": self.input_description,
            "config": self.config,
            "attempts": self.attempts,
            "certificates": [c.to_json_dict() for c in self.certificates],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=False) + "\n"

    def exit_code(self) -> int:
        if any(c.negative for c in self.certificates):
            return 1
        if any(c.positive for c in self.certificates):
            return 0
        return 2
