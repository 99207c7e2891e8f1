"""Budget controller: decaying threshold, multiplicative updates, control loop.

Per experience the loop derives knobs from the current budgets, trains, scores
the resulting metrics, compares the score against a time-decaying threshold,
and scales the batch and replay budgets multiplicatively up or down. The
optimizer budget toggles between a default and an advanced level. A hard
proportional projection keeps the budget total under a capacity cap with a
safety margin, because going over capacity is an unrecoverable failure.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Optional

from .errors import InfeasibleBudgetError
from .metrics import MetricSnapshot, snapshot as build_snapshot
from .urge import UrgeScore, compute_urge, weights_from_preference

if TYPE_CHECKING:  # pragma: no cover - import cycle guard for typing only
    from .scenario import ScenarioConfig
    from .simulator import SimulatedEnvironment


class OptimizerMode(str, Enum):
    DEFAULT = "default"
    ADVANCED = "advanced"


class Outcome(str, Enum):
    COMPLETED = "completed"
    OOM_FAILED = "oom_failed"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class ControllerConfig:
    """Static controller parameters for one run.

    batch_sample_mb and replay_frame_mb are the per-item memory costs used to
    turn budgets into knobs; optimizer_default_mb covers everything that is
    neither batch nor replay memory, and the advanced level is
    optimizer_ratio times that.
    """

    initial_threshold: float  # in (0, 1)
    threshold_decay: float  # per experience, >= 0
    batch_sensitivity: float  # alpha, >= 0
    replay_sensitivity: float  # beta, >= 0
    batch_sample_mb: float
    replay_frame_mb: float
    optimizer_default_mb: float
    optimizer_ratio: float  # >= 1
    capacity_mb: float
    safety_margin: float = 0.05
    min_batch: int = 1
    min_buffer: int = 1

    def __post_init__(self):
        if not 0.0 < self.initial_threshold < 1.0:
            raise ValueError(f"initial threshold must be in (0, 1), got {self.initial_threshold}")
        if self.threshold_decay < 0:
            raise ValueError("threshold decay must be >= 0")
        if self.batch_sensitivity < 0 or self.replay_sensitivity < 0:
            raise ValueError("sensitivities must be >= 0")
        if min(self.batch_sample_mb, self.replay_frame_mb, self.optimizer_default_mb) <= 0:
            raise ValueError("per-item costs and optimizer budget must be > 0")
        if self.optimizer_ratio < 1.0:
            raise ValueError(f"optimizer ratio must be >= 1, got {self.optimizer_ratio}")
        if self.capacity_mb <= self.optimizer_default_mb:
            raise ValueError("capacity must exceed the default optimizer budget")
        if not 0.0 <= self.safety_margin < 1.0:
            raise ValueError("safety margin must be in [0, 1)")
        if self.min_batch < 1 or self.min_buffer < 1:
            raise ValueError("minimum knobs must be >= 1")

    @property
    def optimizer_advanced_mb(self) -> float:
        return self.optimizer_ratio * self.optimizer_default_mb

    @property
    def budget_cap_mb(self) -> float:
        return self.capacity_mb * (1.0 - self.safety_margin)


@dataclass(frozen=True)
class BudgetState:
    """Memory budgets (MB) for batch processing, replay, and the optimizer."""

    batch_mb: float
    replay_mb: float
    optimizer_mb: float
    step: int = 0

    def __post_init__(self):
        if self.batch_mb < 0 or self.replay_mb < 0:
            raise ValueError("budgets must be >= 0")
        if self.step < 0:
            raise ValueError("step must be >= 0")

    @property
    def total_mb(self) -> float:
        return self.batch_mb + self.replay_mb + self.optimizer_mb


@dataclass(frozen=True)
class Knobs:
    """Actionable training configuration derived from a budget state."""

    batch_size: int
    buffer_size: int
    optimizer_mode: OptimizerMode


def threshold_at(config: ControllerConfig, t: int) -> float:
    """Exponentially decaying control setpoint at experience index t (0-based)."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    return config.initial_threshold * math.exp(-config.threshold_decay * t)


def update_budgets(
    prev: BudgetState,
    score: float,
    threshold: float,
    config: ControllerConfig,
    *,
    allow_advanced: bool = True,
) -> BudgetState:
    """One budget update step.

    score >= threshold takes the aggressive branch: both budgets scale by
    1 + sensitivity * (score - threshold) and the optimizer moves to the
    advanced level (unless allow_advanced is False, the fallback a caller
    uses after an infeasible advanced update). Below threshold both budgets
    shrink by the mirrored factor and the optimizer drops to default.

    If the new total would exceed capacity * (1 - safety_margin), the batch
    and replay budgets are scaled proportionally so the total meets the cap
    exactly; the optimizer budget is never scaled, only toggled. Raises
    InfeasibleBudgetError when projection cannot leave room for the minimum
    knobs.
    """
    if score >= threshold:
        gain = score - threshold
        batch_mb = prev.batch_mb * (1.0 + config.batch_sensitivity * gain)
        replay_mb = prev.replay_mb * (1.0 + config.replay_sensitivity * gain)
        optimizer_mb = (
            config.optimizer_advanced_mb if allow_advanced else config.optimizer_default_mb
        )
    else:
        drop = threshold - score
        batch_mb = prev.batch_mb * (1.0 - config.batch_sensitivity * drop)
        replay_mb = prev.replay_mb * (1.0 - config.replay_sensitivity * drop)
        optimizer_mb = config.optimizer_default_mb

    if batch_mb < 0 or replay_mb < 0:
        raise InfeasibleBudgetError(
            "sensitivity large enough to drive a budget negative; "
            f"got batch={batch_mb:.3f} replay={replay_mb:.3f}"
        )

    cap = config.budget_cap_mb
    if batch_mb + replay_mb + optimizer_mb > cap:
        available = cap - optimizer_mb
        scalable = batch_mb + replay_mb
        if available <= 0 or scalable <= 0:
            raise InfeasibleBudgetError(
                f"optimizer budget {optimizer_mb:.1f} MB leaves no room under the "
                f"{cap:.1f} MB cap"
            )
        scale = available / scalable
        batch_mb *= scale
        replay_mb *= scale
        # Rounding can leave the total a few ulps above the cap; nudge down.
        while batch_mb + replay_mb + optimizer_mb > cap:
            batch_mb = math.nextafter(batch_mb, 0.0)
            replay_mb = math.nextafter(replay_mb, 0.0)
        if batch_mb < config.min_batch * config.batch_sample_mb or (
            replay_mb < config.min_buffer * config.replay_frame_mb
        ):
            raise InfeasibleBudgetError(
                "projection pushed a budget below its minimum knob requirement "
                f"(batch {batch_mb:.3f} MB, replay {replay_mb:.3f} MB)"
            )

    return BudgetState(
        batch_mb=batch_mb,
        replay_mb=replay_mb,
        optimizer_mb=optimizer_mb,
        step=prev.step + 1,
    )


def derive_knobs(state: BudgetState, config: ControllerConfig) -> Knobs:
    """Floor-divide budgets by per-item costs, clamped at the minimum knobs."""
    batch = max(config.min_batch, math.floor(state.batch_mb / config.batch_sample_mb))
    buffer = max(config.min_buffer, math.floor(state.replay_mb / config.replay_frame_mb))
    mode = (
        OptimizerMode.ADVANCED
        if state.optimizer_mb == config.optimizer_advanced_mb
        else OptimizerMode.DEFAULT
    )
    return Knobs(batch_size=batch, buffer_size=buffer, optimizer_mode=mode)


@dataclass(frozen=True)
class TraceRecord:
    """Everything observed and decided at one experience boundary.

    budgets is the post-update state (the allocation that will drive the next
    experience). score/threshold/snapshot are None on an OOM record because
    no metrics exist for a failed experience; memory_peak_mb is still the
    amount the attempt would have needed.
    """

    experience: int
    knobs: Knobs
    score: Optional[UrgeScore]
    threshold: Optional[float]
    snapshot: Optional[MetricSnapshot]
    budgets: BudgetState
    memory_peak_mb: float
    oom: bool = False


@dataclass(frozen=True)
class RunTrace:
    records: tuple[TraceRecord, ...]
    outcome: Outcome

    def total_latency_s(self) -> float:
        return sum(r.snapshot.latency_s for r in self.records if r.snapshot is not None)

    def final_plasticity(self) -> Optional[float]:
        for r in reversed(self.records):
            if r.snapshot is not None:
                return r.snapshot.plasticity
        return None

    def final_stability(self) -> Optional[float]:
        for r in reversed(self.records):
            if r.snapshot is not None:
                return r.snapshot.stability
        return None

    def peak_memory_mb(self) -> float:
        return max((r.memory_peak_mb for r in self.records), default=0.0)

    @property
    def completed(self) -> bool:
        return self.outcome is Outcome.COMPLETED


class OverheadRecorder:
    """Accumulates the controller's own wall time, kept out of the trace."""

    def __init__(self):
        self.controller_seconds: list[float] = []
        self._t0 = 0.0

    def start(self) -> None:
        self._t0 = time.perf_counter()

    def stop(self) -> None:
        self.controller_seconds.append(time.perf_counter() - self._t0)

    @property
    def total_seconds(self) -> float:
        return sum(self.controller_seconds)


def run_control_loop(
    scenario: "ScenarioConfig",
    env: "SimulatedEnvironment",
    *,
    overhead: OverheadRecorder | None = None,
) -> RunTrace:
    """Run the full per-experience control loop against one environment.

    For each experience: derive knobs, train, score the metrics, update the
    budgets against the decayed threshold, then ask the environment to
    prefetch the next experience. An OOM report aborts the loop with the
    trace marked failed at that experience. If the advanced optimizer budget
    makes an update infeasible, the update retries with the default
    optimizer (freeing its memory); a second failure propagates with the
    partial trace attached.
    """
    config = scenario.controller
    weights = weights_from_preference(scenario.preference)
    state = scenario.initial_budget_state()
    records: list[TraceRecord] = []
    # Initial score value before any metrics exist; the first real update
    # uses the score measured on experience 1.
    score_value = 1.0

    for experience in range(1, scenario.num_experiences + 1):
        if overhead:
            overhead.start()
        knobs = derive_knobs(state, config)
        if overhead:
            overhead.stop()

        result = env.train_experience(experience, knobs)
        if result.oom:
            records.append(
                TraceRecord(
                    experience=experience,
                    knobs=knobs,
                    score=None,
                    threshold=None,
                    snapshot=None,
                    budgets=state,
                    memory_peak_mb=result.memory_peak_mb,
                    oom=True,
                )
            )
            return RunTrace(records=tuple(records), outcome=Outcome.OOM_FAILED)

        if overhead:
            overhead.start()
        snap = build_snapshot(
            env.accuracy_matrix,
            experience,
            result.latency_s,
            result.memory_peak_mb,
            scenario.thresholds,
        )
        score = compute_urge(snap, weights, scenario.normalize_deviations)
        score_value = score.value
        theta = threshold_at(config, state.step)
        try:
            state = update_budgets(state, score_value, theta, config)
        except InfeasibleBudgetError as exc:
            if score_value >= theta:
                # Advanced optimizer does not fit; free it and keep the
                # aggressive batch/replay growth.
                try:
                    state = update_budgets(
                        state, score_value, theta, config, allow_advanced=False
                    )
                except InfeasibleBudgetError as fallback_exc:
                    fallback_exc.partial_trace = RunTrace(
                        records=tuple(records), outcome=Outcome.INFEASIBLE
                    )
                    raise
            else:
                exc.partial_trace = RunTrace(
                    records=tuple(records), outcome=Outcome.INFEASIBLE
                )
                raise
        if overhead:
            overhead.stop()

        env.prefetch_next(experience + 1)
        records.append(
            TraceRecord(
                experience=experience,
                knobs=knobs,
                score=score,
                threshold=theta,
                snapshot=snap,
                budgets=state,
                memory_peak_mb=result.memory_peak_mb,
                oom=False,
            )
        )

    return RunTrace(records=tuple(records), outcome=Outcome.COMPLETED)
