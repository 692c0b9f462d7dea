"""Verification reports: named residual checks with tolerances."""
from __future__ import annotations

import json
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field


def _jsonable(value):
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if hasattr(value, "item"):
        return _jsonable(value.item())
    return value


@dataclass
class Check:
    name: str
    residual: float
    tolerance: float
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.residual = float(self.residual)
        self.tolerance = float(self.tolerance)

    @property
    def passed(self) -> bool:
        return math.isfinite(self.residual) and self.residual <= self.tolerance

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        out = {"name": self.name, "status": self.status,
               "residual": _jsonable(self.residual), "tolerance": self.tolerance}
        if self.params:
            out["params"] = _jsonable(self.params)
        return out


@dataclass
class VerificationReport:
    suite: str
    params: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    timing_ms: float = 0.0
    info: dict = field(default_factory=dict)

    def add(self, name: str, residual: float, tolerance: float, **params) -> Check:
        check = Check(name, residual, tolerance, params)
        self.checks.append(check)
        return check

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @contextmanager
    def timed(self):
        start = time.perf_counter()
        try:
            yield self
        finally:
            self.timing_ms = (time.perf_counter() - start) * 1000.0

    def to_dict(self, timestamp: bool = False) -> dict:
        out = {
            "suite": self.suite,
            "params": _jsonable(self.params),
            "checks": [c.to_dict() for c in self.checks],
            "timing_ms": round(self.timing_ms, 3) if timestamp else None,
        }
        if self.info:
            out["info"] = _jsonable(self.info)
        if not timestamp:
            del out["timing_ms"]
        return out

    def to_json(self, timestamp: bool = True) -> str:
        return json.dumps(self.to_dict(timestamp), indent=2, sort_keys=False)

    def lines(self) -> list:
        return [f"[{c.status.upper()}] {self.suite}.{c.name}: residual={c.residual:.3e} tol={c.tolerance:.1e}"
                for c in self.checks]


def merge(suite: str, reports: list, params: dict | None = None) -> VerificationReport:
    out = VerificationReport(suite, params or {})
    for r in reports:
        for c in r.checks:
            out.checks.append(Check(f"{r.suite}.{c.name}", c.residual, c.tolerance, c.params))
        out.timing_ms += r.timing_ms
        if r.info:
            out.info[r.suite] = r.info
    return out
