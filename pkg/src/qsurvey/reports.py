"""Versioned JSON report envelope with a byte-stable region.

Everything except ``started_at`` and ``duration_ms`` is deterministic for a
fixed configuration; ``stable_sha256`` hashes exactly that region.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

SCHEMA_VERSION = "1.0"
TIMING_KEYS = ("started_at", "duration_ms")


@dataclass
class Case:
    name: str
    expected: float | None
    observed: float | None
    tolerance: float
    passed: bool
    provenance: str
    message: str | None = None

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "expected": self.expected,
            "observed": self.observed,
            "tolerance": self.tolerance,
            "pass": bool(self.passed),
            "provenance": self.provenance,
        }
        if self.message is not None:
            out["message"] = self.message
        return out


def within(name, expected, observed, tolerance, provenance="closed-form") -> Case:
    ok = math.isfinite(observed) and abs(observed - expected) <= tolerance
    return Case(name, expected, observed, tolerance, ok, provenance)


def at_most(name, observed, bound, provenance="closed-form") -> Case:
    """``observed`` is a non-negative error that must stay below ``bound``."""
    ok = math.isfinite(observed) and observed <= bound
    return Case(name, 0.0, observed, bound, ok, provenance)


def failed(name, exc: Exception, provenance="error") -> Case:
    return Case(name, None, None, 0.0, False, provenance, f"{type(exc).__name__}: {exc}")


def clean(value: Any) -> Any:
    """Convert to plain JSON types; non-finite floats become ``null``."""
    if isinstance(value, dict):
        return {str(k): clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [clean(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, complex):
        return [clean(value.real), clean(value.imag)]
    return value


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=True, allow_nan=False)


def stable_region(envelope: dict) -> dict:
    return {k: v for k, v in envelope.items() if k not in TIMING_KEYS and k != "stable_sha256"}


def stable_bytes(envelope: dict) -> bytes:
    return _dumps(stable_region(envelope)).encode("ascii")


def build_envelope(
    suite: str,
    config: dict,
    cases: list[Case],
    started_at: str,
    duration_ms: float,
    extra: dict | None = None,
) -> dict:
    env = {
        "schema_version": SCHEMA_VERSION,
        "suite": suite,
        "config": clean(config),
        "cases": [clean(c.to_dict()) for c in cases],
    }
    for key, value in (extra or {}).items():
        env[key] = clean(value)
    env["overall_pass"] = all(c.passed for c in cases)
    env["stable_sha256"] = hashlib.sha256(stable_bytes(env)).hexdigest()
    env["started_at"] = started_at
    env["duration_ms"] = round(float(duration_ms), 3)
    return env


def dumps(envelope: dict) -> str:
    return _dumps(envelope) + "\n"
