"""Decibel-scale trade-off scoring of evaluated design points.

The score rewards accuracy and penalizes model size and runtime on a log
scale: 20 * (kappa*log10(a) - beta*log10(p) - gamma*log10(r)) with a the mAP
in percent, p the parameter count in millions, and r the CPU time in seconds.
The decomposed form is used so extreme magnitudes cannot overflow and the
exact scaling laws hold to double precision: a tenfold increase in p shifts
the score by exactly -20*beta dB, a tenfold increase in r by -20*gamma dB,
and a tenfold increase in a by +20*kappa dB.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import NonPositiveInput, ValidationError
from .model import Theta

__all__ = [
    "NetScoreWeights",
    "EvaluationRecord",
    "ScoredRecord",
    "netscore_values",
    "modified_netscore",
    "score_all",
    "RECORD_SOURCES",
]

RECORD_SOURCES = ("measured_file", "external_process", "surrogate")


@dataclass(frozen=True)
class NetScoreWeights:
    """Exponents for the accuracy, size, and runtime terms."""

    kappa: float = 1.0
    beta: float = 0.45
    gamma: float = 0.2

    def __post_init__(self):
        for name in ("kappa", "beta", "gamma"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value >= 0):
                raise ValidationError(f"{name} must be a finite non-negative real, got {value!r}")


@dataclass(frozen=True)
class EvaluationRecord:
    """One evaluated design point.

    accuracy is mAP in percent and must lie in (0, 100]; params_m is the
    trainable parameter count in millions; runtime_s is CPU seconds per
    inference. source names where the numbers came from.
    """

    theta: Theta
    accuracy: float
    params_m: float
    runtime_s: float
    source: str
    metadata: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if not (isinstance(self.accuracy, (int, float)) and math.isfinite(self.accuracy)):
            raise ValidationError(f"accuracy must be a finite real, got {self.accuracy!r}")
        if self.accuracy <= 0:
            raise NonPositiveInput(f"accuracy must be > 0 (got {self.accuracy!r})")
        if self.accuracy > 100:
            raise ValidationError(f"accuracy is mAP in percent and must be <= 100, got {self.accuracy!r}")
        for name in ("params_m", "runtime_s"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                raise ValidationError(f"{name} must be a finite real, got {value!r}")
            if value <= 0:
                raise NonPositiveInput(f"{name} must be > 0 (got {value!r})")
        if self.source not in RECORD_SOURCES:
            raise ValidationError(f"source must be one of {RECORD_SOURCES}, got {self.source!r}")


@dataclass(frozen=True)
class ScoredRecord:
    """An evaluation record together with its score in dB."""

    record: EvaluationRecord
    score: float


def netscore_values(
    accuracy: float,
    params_m: float,
    runtime_s: float,
    weights: NetScoreWeights = NetScoreWeights(),
) -> float:
    """Score a raw (accuracy, params, runtime) triple.

    Raises NonPositiveInput if any of the three is zero or negative; the
    logarithms are undefined there.
    """
    for name, value in (("accuracy", accuracy), ("params_m", params_m), ("runtime_s", runtime_s)):
        if not (isinstance(value, (int, float)) and math.isfinite(value)):
            raise ValidationError(f"{name} must be a finite real, got {value!r}")
        if value <= 0:
            raise NonPositiveInput(f"{name} must be > 0 (got {value!r})")
    return 20.0 * (
        weights.kappa * math.log10(accuracy)
        - weights.beta * math.log10(params_m)
        - weights.gamma * math.log10(runtime_s)
    )


def modified_netscore(record: EvaluationRecord, weights: NetScoreWeights = NetScoreWeights()) -> float:
    """Score one evaluation record."""
    return netscore_values(record.accuracy, record.params_m, record.runtime_s, weights)


def score_all(
    records: Iterable[EvaluationRecord],
    weights: NetScoreWeights = NetScoreWeights(),
) -> tuple[ScoredRecord, ...]:
    """Score records element-wise, preserving order.

    A NonPositiveInput raised for any record is re-raised with the record's
    position and design point prepended, so the offender is identifiable.
    """
    scored = []
    for i, record in enumerate(records):
        try:
            value = modified_netscore(record, weights)
        except NonPositiveInput as exc:
            raise NonPositiveInput(
                f"record {i} (alpha={record.theta.alpha:g}, "
                f"resolution={record.theta.resolution}): {exc}"
            ) from None
        scored.append(ScoredRecord(record, value))
    return tuple(scored)
