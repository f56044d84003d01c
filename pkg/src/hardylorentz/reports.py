"""Named-scalar reports returned by the verification routines."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

__all__ = ["Report", "jsonable"]


def jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become strings."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return value


@dataclass
class Report:
    """Values, pass/fail flags and free-form notes of one check."""

    name: str
    values: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(bool(v) for v in self.flags.values())

    def __getitem__(self, key):
        if key in self.values:
            return self.values[key]
        return self.flags[key]

    def failing(self) -> list[str]:
        return [k for k, v in self.flags.items() if not v]

    def to_json(self) -> dict:
        return jsonable({"name": self.name, "passed": self.passed, "values": self.values,
                         "flags": self.flags, "notes": self.notes})

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)
