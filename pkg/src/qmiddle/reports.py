"""Check reports shared by the verification campaigns.

A report keeps only the maximum deviation, the number of trials and the
worst case, so a campaign's JSON stays small however many points it visits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

SCHEMA_VERSION = "1.0"


def _finite(value: float) -> float:
    value = float(value)
    return math.inf if math.isnan(value) else value


def _json_float(value: float):
    # JSON has no inf; keep it readable instead of emitting a bare Infinity
    return value if math.isfinite(value) else "inf"


def _params_json(params):
    if params is None:
        return None
    return params.to_json() if hasattr(params, "to_json") else params


@dataclass
class CheckReport:
    """Max-deviation record for one named check.

    ``record`` takes a deviation, the parameters that produced it and a short
    key saying which sub-check it came from. NaN counts as a failure.
    """

    name: str
    tolerance: float
    max_deviation: float = 0.0
    trials: int = 0
    details: dict = field(default_factory=dict)
    worst: dict | None = None

    def record(self, dev: float, params=None, key: str = "") -> None:
        dev = _finite(dev)
        if key:
            self.details[key] = max(self.details.get(key, 0.0), dev)
        if self.worst is None or dev > self.max_deviation:
            self.max_deviation = dev
            self.worst = {"deviation": dev, "key": key, "params": _params_json(params)}

    def merge(self, other: "CheckReport") -> "CheckReport":
        for key, dev in other.details.items():
            self.details[key] = max(self.details.get(key, 0.0), dev)
        if other.worst is not None and (self.worst is None or other.max_deviation > self.max_deviation):
            self.max_deviation = other.max_deviation
            self.worst = other.worst
        self.trials += other.trials
        return self

    @property
    def passed(self) -> bool:
        return self.trials > 0 and self.max_deviation <= self.tolerance

    def to_json(self) -> dict:
        worst = None
        if self.worst is not None:
            worst = dict(self.worst, deviation=_json_float(self.worst["deviation"]))
        return {
            "name": self.name,
            "passed": self.passed,
            "tolerance": self.tolerance,
            "maxDeviation": _json_float(self.max_deviation),
            "trials": self.trials,
            "details": {k: _json_float(v) for k, v in sorted(self.details.items())},
            "worstCase": worst,
        }


@dataclass
class TransformCheck:
    """Residuals of a truncated transform at N and 2N over many trials.

    Passing needs every in-regime residual at N under ``tolerance`` and the
    2N residual at least ``decay_factor`` times smaller in a fraction
    ``decay_fraction`` of the trials. Draws outside the convergent regime are
    counted in ``flagged`` and excluded from both tests.
    """

    name: str
    tolerance: float
    decay_factor: float = 10.0
    decay_fraction: float = 0.9
    trials: int = 0
    decayed: int = 0
    flagged: int = 0
    redraws: int = 0
    max_residual: float = 0.0
    max_residual_doubled: float = 0.0
    max_tail: float = 0.0
    worst: dict | None = None

    def record(self, residual: float, residual_doubled: float, tail: float = 0.0, params=None) -> None:
        residual, residual_doubled = _finite(residual), _finite(residual_doubled)
        self.trials += 1
        if residual_doubled * self.decay_factor < residual:
            self.decayed += 1
        self.max_residual_doubled = max(self.max_residual_doubled, residual_doubled)
        self.max_tail = max(self.max_tail, _finite(tail))
        if self.worst is None or residual > self.max_residual:
            self.max_residual = residual
            self.worst = {
                "residual": residual,
                "residualDoubled": residual_doubled,
                "params": _params_json(params),
            }

    def merge(self, other: "TransformCheck") -> "TransformCheck":
        self.trials += other.trials
        self.decayed += other.decayed
        self.flagged += other.flagged
        self.redraws += other.redraws
        self.max_residual_doubled = max(self.max_residual_doubled, other.max_residual_doubled)
        self.max_tail = max(self.max_tail, other.max_tail)
        if other.worst is not None and (self.worst is None or other.max_residual > self.max_residual):
            self.max_residual = other.max_residual
            self.worst = other.worst
        return self

    @property
    def decay_rate(self) -> float:
        return self.decayed / self.trials if self.trials else 0.0

    @property
    def passed(self) -> bool:
        return self.trials > 0 and self.max_residual <= self.tolerance and self.decay_rate >= self.decay_fraction

    def to_json(self) -> dict:
        worst = None
        if self.worst is not None:
            worst = {k: (_json_float(v) if isinstance(v, float) else v) for k, v in self.worst.items()}
        return {
            "name": self.name,
            "passed": self.passed,
            "tolerance": self.tolerance,
            "maxResidual": _json_float(self.max_residual),
            "maxResidualDoubled": _json_float(self.max_residual_doubled),
            "maxTailMass": _json_float(self.max_tail),
            "trials": self.trials,
            "decayFraction": self.decay_rate,
            "decayRequired": self.decay_fraction,
            "flaggedOutOfRegime": self.flagged,
            "redraws": self.redraws,
            "worstCase": worst,
        }
