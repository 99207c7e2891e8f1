"""Accuracy bookkeeping and the plasticity / stability metrics.

The accuracy matrix is lower-triangular: entry (k, i) with i <= k holds the
test accuracy on experience i measured after training experience k. Both
indices are 1-based to match the usual experience numbering.

Plasticity after experience K is the mean of row K: the current model's
accuracy over everything seen so far. Stability is one minus the mean
forgetting over prior experiences, where forgetting on experience i is
max(0, a[i][i] - a[K][i]) -- the accuracy lost since experience i was
trained, clipped at zero. Stability is 1 by definition at K = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import IncompleteMatrixError


class AccuracyMatrix:
    """Lower-triangular record of per-experience test accuracies.

    Rows are appended one experience at a time; row k must contain exactly
    k accuracies, each in [0, 1]. The matrix is complete by construction:
    asking for a row beyond what has been trained raises
    IncompleteMatrixError.
    """

    def __init__(self, rows: Iterable[Sequence[float]] = ()):
        self._rows: list[tuple[float, ...]] = []
        for row in rows:
            self.add_row(row)

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[float]]) -> "AccuracyMatrix":
        return cls(rows)

    def add_row(self, row: Sequence[float]) -> None:
        k = len(self._rows) + 1
        values = tuple(float(v) for v in row)
        if len(values) != k:
            raise ValueError(
                f"row {k} must contain exactly {k} accuracies, got {len(values)}"
            )
        for v in values:
            if not math.isfinite(v) or not 0.0 <= v <= 1.0:
                raise ValueError(f"accuracy {v!r} outside [0, 1] in row {k}")
        self._rows.append(values)

    @property
    def num_experiences_trained(self) -> int:
        return len(self._rows)

    def row(self, k: int) -> tuple[float, ...]:
        if k < 1:
            raise ValueError(f"experience index must be >= 1, got {k}")
        if k > len(self._rows):
            raise IncompleteMatrixError(
                f"matrix has {len(self._rows)} rows, row {k} was requested"
            )
        return self._rows[k - 1]

    def get(self, k: int, i: int) -> float:
        if not 1 <= i <= k:
            raise ValueError(f"entry ({k}, {i}) is outside the lower triangle")
        return self.row(k)[i - 1]

    def entries(self) -> dict[tuple[int, int], float]:
        """Dict view {(k, i): accuracy}, mainly for serialization and tests."""
        return {
            (k, i): v
            for k, row in enumerate(self._rows, start=1)
            for i, v in enumerate(row, start=1)
        }

    def __len__(self) -> int:
        return len(self._rows)

    def __repr__(self) -> str:
        return f"AccuracyMatrix(num_experiences_trained={len(self._rows)})"


@dataclass(frozen=True)
class Thresholds:
    """Target levels the health score measures deviations against.

    latency_s is the per-experience training latency target; memory_mb is
    the maximum allowed memory (must be positive).
    """

    plasticity: float
    stability: float
    latency_s: float
    memory_mb: float

    def __post_init__(self):
        if not self.memory_mb > 0:
            raise ValueError(f"memory threshold must be > 0, got {self.memory_mb}")


@dataclass(frozen=True)
class MetricSnapshot:
    """State of the four controlled metrics after one experience."""

    plasticity: float
    stability: float
    latency_s: float
    memory_peak_mb: float
    thresholds: Thresholds

    def __post_init__(self):
        if not 0.0 <= self.plasticity <= 1.0:
            raise ValueError(f"plasticity {self.plasticity} outside [0, 1]")
        if not 0.0 <= self.stability <= 1.0:
            raise ValueError(f"stability {self.stability} outside [0, 1]")
        if self.latency_s < 0:
            raise ValueError(f"latency must be >= 0, got {self.latency_s}")
        if self.memory_peak_mb < 0:
            raise ValueError(f"memory peak must be >= 0, got {self.memory_peak_mb}")


def plasticity(matrix: AccuracyMatrix, k: int) -> float:
    """Mean accuracy of the current model over all k experiences seen so far."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    row = matrix.row(k)
    return sum(row) / k


def stability(matrix: AccuracyMatrix, k: int) -> float:
    """One minus mean forgetting over experiences 1..k-1; exactly 1 when k = 1.

    Forgetting on experience i is max(0, a[i][i] - a[k][i]). The result is
    clamped to [0, 1] so it always satisfies the snapshot invariant.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k == 1:
        matrix.row(1)  # completeness check only
        return 1.0
    current = matrix.row(k)
    total = 0.0
    for i in range(1, k):
        lost = matrix.get(i, i) - current[i - 1]
        if lost > 0.0:
            total += lost
    value = 1.0 - total / (k - 1)
    return min(1.0, max(0.0, value))


def snapshot(
    matrix: AccuracyMatrix,
    k: int,
    latency_s: float,
    memory_peak_mb: float,
    thresholds: Thresholds,
) -> MetricSnapshot:
    """Bundle plasticity/stability with the observed latency and memory peak."""
    return MetricSnapshot(
        plasticity=plasticity(matrix, k),
        stability=stability(matrix, k),
        latency_s=latency_s,
        memory_peak_mb=memory_peak_mb,
        thresholds=thresholds,
    )
