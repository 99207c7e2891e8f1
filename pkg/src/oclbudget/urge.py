"""The URGE health score and the rule-based sensitivity weights.

The score is a product of four logistic factors, one per controlled metric.
High plasticity, high stability, and high memory usage each pull the score
down (those conditions mean "no urgent need" or "no headroom"); high latency
pulls it up. A high score therefore signals an urgent, memory-safe
optimization opportunity; a low score says the system is either healthy or
too close to its memory limit to push harder.

Weights come from a user preference ordering: with n metrics, position p
(1-indexed from most important) gets raw weight n + 1 - p, normalized to
sum 1. For the four metrics this is the 4/3/2/1 rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import InvalidPreferenceError, NumericDomainError
from .metrics import MetricSnapshot

METRIC_NAMES = ("memory", "plasticity", "stability", "latency")

# Logistic arguments are saturated here so every factor stays strictly inside
# (0, 1) in IEEE double arithmetic: exp(-36) is still above the epsilon at 1.0.
_ARG_LIMIT = 36.0

# Floor for the threshold magnitude when normalizing deviations.
_NORM_EPS = 1e-9


@dataclass(frozen=True)
class Weights:
    """Per-metric sensitivities (k_p, k_s, k_l, k_m).

    Weights produced by weights_from_preference are normalized to sum 1;
    arbitrary non-negative weights are accepted for sensitivity studies
    (e.g. scaling a single factor), checked via validate_normalized().
    """

    k_p: float
    k_s: float
    k_l: float
    k_m: float

    def __post_init__(self):
        for name, v in self.as_dict().items():
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"weight {name} must be finite and >= 0, got {v}")

    def as_dict(self) -> dict[str, float]:
        return {"k_p": self.k_p, "k_s": self.k_s, "k_l": self.k_l, "k_m": self.k_m}

    def total(self) -> float:
        return self.k_p + self.k_s + self.k_l + self.k_m

    def validate_normalized(self, tol: float = 1e-9) -> None:
        if abs(self.total() - 1.0) > tol:
            raise ValueError(f"weights sum to {self.total()!r}, expected 1 within {tol}")


@dataclass(frozen=True)
class UrgeScore:
    """Score value plus the four logistic factors it is the product of."""

    value: float
    plasticity_factor: float
    stability_factor: float
    latency_factor: float
    memory_factor: float

    def __post_init__(self):
        for f in self.components():
            if not 0.0 < f < 1.0:
                raise ValueError(f"factor {f!r} outside the open interval (0, 1)")
        product = (
            self.plasticity_factor
            * self.stability_factor
            * self.latency_factor
            * self.memory_factor
        )
        if abs(product - self.value) > 1e-12:
            raise ValueError("score value does not equal the product of its factors")

    def components(self) -> tuple[float, float, float, float]:
        return (
            self.plasticity_factor,
            self.stability_factor,
            self.latency_factor,
            self.memory_factor,
        )


def weights_from_preference(order: Sequence[str]) -> Weights:
    """Derive normalized weights from a most-important-first metric ordering.

    Position p (1-indexed) receives raw weight n + 1 - p; raw weights are
    normalized to sum 1. E.g. [memory, plasticity, stability, latency] gives
    (k_m, k_p, k_s, k_l) = (0.4, 0.3, 0.2, 0.1).
    """
    names = [str(n) for n in order]
    if sorted(names) != sorted(METRIC_NAMES):
        raise InvalidPreferenceError(
            f"preference must name each of {METRIC_NAMES} exactly once, got {names}"
        )
    n = len(names)
    raw = {name: float(n + 1 - p) for p, name in enumerate(names, start=1)}
    total = sum(raw.values())
    return Weights(
        k_p=raw["plasticity"] / total,
        k_s=raw["stability"] / total,
        k_l=raw["latency"] / total,
        k_m=raw["memory"] / total,
    )


def _logistic(x: float) -> float:
    if x > _ARG_LIMIT:
        x = _ARG_LIMIT
    elif x < -_ARG_LIMIT:
        x = -_ARG_LIMIT
    return 1.0 / (1.0 + math.exp(-x))


def compute_urge(
    snapshot: MetricSnapshot,
    weights: Weights,
    normalize_deviations: bool = True,
) -> UrgeScore:
    """Evaluate the health score for one metric snapshot.

    With normalize_deviations on (the default), each deviation is divided by
    the magnitude of its threshold so that fractions, seconds, and megabytes
    all enter the logistics on comparable scales. Turning it off feeds the
    raw differences through, which makes the latency and memory factors
    saturate almost immediately; it exists for fidelity experiments.
    """
    th = snapshot.thresholds
    pairs = (
        (snapshot.plasticity, th.plasticity),
        (snapshot.stability, th.stability),
        (snapshot.latency_s, th.latency_s),
        (snapshot.memory_peak_mb, th.memory_mb),
    )
    for value, threshold in pairs:
        if not (math.isfinite(value) and math.isfinite(threshold)):
            raise NumericDomainError(
                f"score inputs must be finite, got value={value!r} threshold={threshold!r}"
            )

    def deviation(value: float, threshold: float) -> float:
        d = value - threshold
        if normalize_deviations:
            d /= max(abs(threshold), _NORM_EPS)
        return d

    d_p = deviation(snapshot.plasticity, th.plasticity)
    d_s = deviation(snapshot.stability, th.stability)
    d_l = deviation(snapshot.latency_s, th.latency_s)
    d_m = deviation(snapshot.memory_peak_mb, th.memory_mb)

    f_p = _logistic(-(weights.k_p * d_p))
    f_s = _logistic(-(weights.k_s * d_s))
    f_l = _logistic(weights.k_l * d_l)
    f_m = _logistic(-(weights.k_m * d_m))

    return UrgeScore(
        value=f_p * f_s * f_l * f_m,
        plasticity_factor=f_p,
        stability_factor=f_s,
        latency_factor=f_l,
        memory_factor=f_m,
    )
