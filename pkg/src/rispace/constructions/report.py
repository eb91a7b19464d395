"""Witness reports: constructed objects plus re-verified claims."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

from ..inclusions import InclusionVerdict, LimitVerdict
from ..quadrature import NormResult

ALL_VERIFIED = "AllVerified"
FAILURES = "Failures"


def _status_of(result) -> str:
    if isinstance(result, NormResult):
        return result.status.value
    if isinstance(result, LimitVerdict):
        return result.kind.value
    if isinstance(result, InclusionVerdict):
        return {True: "True", False: "False"}.get(result.holds, "Unknown")
    if isinstance(result, bool):
        return "True" if result else "False"
    if hasattr(result, "found"):
        return "True" if result.found else "False"
    raise TypeError(f"unsupported claim result {type(result).__name__}")


def _jsonable(obj):
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "to_dict"):
        return _jsonable(obj.to_dict())
    if hasattr(obj, "item"):
        return _jsonable(obj.item())
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


@dataclass
class Claim:
    """One checked statement; ``required`` is the status the argument needs."""

    description: str
    result: Any
    required: str
    detail: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        return _status_of(self.result)

    @property
    def ok(self) -> bool:
        return self.status == self.required

    def to_dict(self):
        res = self.result
        if isinstance(res, bool):
            res = {"holds": res}
        return {"description": self.description, "required": self.required, "status": self.status,
                "ok": self.ok, "result": _jsonable(res), "detail": _jsonable(self.detail)}


@dataclass
class WitnessReport:
    theorem: str
    objects: dict = field(default_factory=dict)
    claims: list = field(default_factory=list)
    horizon: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def add(self, description, result, required="Converged", **detail) -> Claim:
        c = Claim(description, result, required, detail)
        self.claims.append(c)
        return c

    def check(self, description, holds: bool, **detail) -> Claim:
        """A claim decided by direct (exact or elementwise) comparison."""
        return self.add(description, bool(holds), "True", **detail)

    @property
    def failures(self) -> list:
        return [c.description for c in self.claims if not c.ok]

    @property
    def verdict(self) -> str:
        return FAILURES if self.failures else ALL_VERIFIED

    @property
    def all_verified(self) -> bool:
        return not self.failures

    def claim(self, prefix: str) -> Claim:
        for c in self.claims:
            if c.description.startswith(prefix):
                return c
        raise KeyError(prefix)

    def to_dict(self):
        return {"theorem": self.theorem, "verdict": self.verdict, "failures": self.failures,
                "objects": _jsonable(self.objects), "claims": [c.to_dict() for c in self.claims],
                "horizon": _jsonable(self.horizon), "notes": list(self.notes)}

    def to_json(self, indent=2) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=indent)

    def summary(self) -> str:
        lines = [f"{self.theorem}: {self.verdict}"]
        for c in self.claims:
            lines.append(f"  [{'ok' if c.ok else 'FAIL'}] {c.description}: {c.status} (need {c.required})")
        return "\n".join(lines)
