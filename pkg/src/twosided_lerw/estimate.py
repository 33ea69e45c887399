"""A value together with how it was obtained and how far it can be trusted."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

__all__ = ["Estimate", "MODES"]

MODES = ("exact", "direct", "extrapolated", "monte-carlo")


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if hasattr(x, "to_dict"):
        return x.to_dict()
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item"):  # numpy scalars
        return x.item()
    return x


@dataclass(frozen=True)
class Estimate:
    """``value`` with an ``error`` field.

    For deterministic modes ``error`` is a truncation/extrapolation bound; for
    Monte Carlo it is one standard error.  ``details`` holds the raw sequence
    or sample counts the value was built from.
    """

    value: Any
    error: float = 0.0
    mode: str = "direct"
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if not self.error >= 0:
            raise ValueError("error must be nonnegative")

    def __float__(self):
        return float(self.value)

    @property
    def rel_error(self) -> float:
        v = abs(float(self.value))
        return self.error / v if v else math.inf

    def to_dict(self) -> dict:
        out = {"value": _jsonable(self.value), "error": float(self.error), "mode": self.mode}
        if isinstance(self.value, Fraction):
            out["float"] = float(self.value)
        if self.details:
            out["details"] = _jsonable(self.details)
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    # simple error propagation for independent factors

    def __mul__(self, other):
        if isinstance(other, Estimate):
            a, b = float(self.value), float(other.value)
            err = math.hypot(self.error * abs(b), other.error * abs(a))
            return Estimate(a * b, err, _combine(self.mode, other.mode))
        return Estimate(self.value * other, self.error * abs(float(other)), self.mode, self.details)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Estimate):
            a, b = float(self.value), float(other.value)
            if b == 0:
                raise ZeroDivisionError("division by an estimate of zero")
            r = a / b
            err = math.hypot(self.error / abs(b), other.error * abs(r) / abs(b))
            return Estimate(r, err, _combine(self.mode, other.mode))
        return Estimate(self.value / other, self.error / abs(float(other)), self.mode, self.details)

    def __repr__(self):
        return f"Estimate({float(self.value):.10g} ± {self.error:.3g}, {self.mode})"


def _combine(a: str, b: str) -> str:
    order = {m: i for i, m in enumerate(MODES)}
    return a if order[a] >= order[b] else b
