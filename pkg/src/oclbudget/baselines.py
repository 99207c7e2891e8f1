"""Comparison policies: MAX-A, MAX-P, a fixed-config proxy, and the oracle.

All baselines run the same per-experience loop as the controller but never
adapt: knobs stay fixed for the whole run. The health score and threshold
are still computed and recorded as diagnostics, so a fixed policy whose
knobs equal the controller's initial knobs produces a trace identical to a
neutral controller (zero sensitivities, unit optimizer ratio).

The "fixed" policy is a plain fixed-configuration proxy baseline. It stands
in for latent-replay-style systems in comparisons without claiming to model
their internals.

The oracle is a brute-force offline sweep over a 7 x 6 batch/buffer grid
(42 runs). Its best configuration maximizes the mean of final plasticity and
final stability over non-OOM runs, with ties broken by lower total latency,
then by the grid coordinates so the result never depends on enumeration
order.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

from .controller import (
    BudgetState,
    Knobs,
    OptimizerMode,
    Outcome,
    RunTrace,
    TraceRecord,
    derive_knobs,
    threshold_at,
)
from .metrics import snapshot as build_snapshot
from .scenario import ScenarioConfig, build_environment
from .simulator import SimulatedEnvironment
from .urge import compute_urge, weights_from_preference

ORACLE_BATCH_GRID = (16, 32, 64, 128, 256, 512, 1024)
ORACLE_BUFFER_GRID = (10, 100, 1000, 10000, 100000, 1000000)


class PolicyKind(str, Enum):
    MAX_A = "max_a"
    MAX_P = "max_p"
    FIXED = "fixed"


@dataclass(frozen=True)
class BaselinePolicy:
    """A non-adaptive policy: fixed knobs for the whole run.

    batch/buffer of None means "use the scenario's initial budgets", which is
    what makes the fixed policy exactly equivalent to a neutral controller.
    """

    kind: PolicyKind
    batch: Optional[int] = None
    buffer: Optional[int] = None
    optimizer_mode: OptimizerMode = OptimizerMode.DEFAULT

    @classmethod
    def max_a(cls, batch: int = 32, buffer: int = 1000) -> "BaselinePolicy":
        # Framework-default knobs with both optimization plugins enabled.
        return cls(PolicyKind.MAX_A, batch, buffer, OptimizerMode.ADVANCED)

    @classmethod
    def max_p(cls, batch: int = 1024, buffer: int = 10) -> "BaselinePolicy":
        # Throughput-first: large batch, small buffer, default optimizer.
        return cls(PolicyKind.MAX_P, batch, buffer, OptimizerMode.DEFAULT)

    @classmethod
    def fixed(
        cls,
        batch: Optional[int] = None,
        buffer: Optional[int] = None,
        optimizer_mode: OptimizerMode = OptimizerMode.DEFAULT,
    ) -> "BaselinePolicy":
        return cls(PolicyKind.FIXED, batch, buffer, optimizer_mode)

    @classmethod
    def from_scenario(cls, kind: PolicyKind, scenario: ScenarioConfig) -> "BaselinePolicy":
        presets = scenario.baselines
        if kind is PolicyKind.MAX_A:
            return cls.max_a(presets.max_a.batch, presets.max_a.buffer)
        if kind is PolicyKind.MAX_P:
            return cls.max_p(presets.max_p.batch, presets.max_p.buffer)
        return cls.fixed(presets.fixed.batch, presets.fixed.buffer)


def _policy_state(
    policy: BaselinePolicy, scenario: ScenarioConfig, step: int
) -> tuple[Knobs, BudgetState]:
    """Knobs plus the synthetic budget state a fixed policy occupies."""
    config = scenario.controller
    if policy.batch is None or policy.buffer is None:
        state = scenario.initial_budget_state()
        knobs = derive_knobs(state, config)
        return knobs, BudgetState(
            batch_mb=state.batch_mb,
            replay_mb=state.replay_mb,
            optimizer_mb=state.optimizer_mb,
            step=step,
        )
    knobs = Knobs(
        batch_size=policy.batch,
        buffer_size=policy.buffer,
        optimizer_mode=policy.optimizer_mode,
    )
    optimizer_mb = (
        config.optimizer_advanced_mb
        if policy.optimizer_mode is OptimizerMode.ADVANCED
        else config.optimizer_default_mb
    )
    return knobs, BudgetState(
        batch_mb=policy.batch * config.batch_sample_mb,
        replay_mb=policy.buffer * config.replay_frame_mb,
        optimizer_mb=optimizer_mb,
        step=step,
    )


def run_baseline(
    policy: BaselinePolicy,
    scenario: ScenarioConfig,
    env: SimulatedEnvironment | None = None,
) -> RunTrace:
    """Run the full experience sequence with fixed knobs; no adaptation.

    OOM is recorded the same way as in the controller loop and is a valid
    outcome for a baseline, not an exception.
    """
    if env is None:
        env = build_environment(scenario)
    config = scenario.controller
    weights = weights_from_preference(scenario.preference)
    records: list[TraceRecord] = []

    for experience in range(1, scenario.num_experiences + 1):
        knobs, budgets = _policy_state(policy, scenario, step=experience - 1)
        result = env.train_experience(experience, knobs)
        if result.oom:
            records.append(
                TraceRecord(
                    experience=experience,
                    knobs=knobs,
                    score=None,
                    threshold=None,
                    snapshot=None,
                    budgets=budgets,
                    memory_peak_mb=result.memory_peak_mb,
                    oom=True,
                )
            )
            return RunTrace(records=tuple(records), outcome=Outcome.OOM_FAILED)

        snap = build_snapshot(
            env.accuracy_matrix,
            experience,
            result.latency_s,
            result.memory_peak_mb,
            scenario.thresholds,
        )
        score = compute_urge(snap, weights, scenario.normalize_deviations)
        theta = threshold_at(config, experience - 1)
        env.prefetch_next(experience + 1)
        # Post-step state with the step counter advanced, mirroring the
        # controller's post-update record.
        _, post = _policy_state(policy, scenario, step=experience)
        records.append(
            TraceRecord(
                experience=experience,
                knobs=knobs,
                score=score,
                threshold=theta,
                snapshot=snap,
                budgets=post,
                memory_peak_mb=result.memory_peak_mb,
                oom=False,
            )
        )

    return RunTrace(records=tuple(records), outcome=Outcome.COMPLETED)


@dataclass(frozen=True)
class OracleResult:
    """All grid traces plus the winning configuration (None if all OOM)."""

    best_config: Optional[tuple[int, int]]
    traces: tuple[tuple[tuple[int, int], RunTrace], ...]

    @property
    def feasible(self) -> bool:
        return self.best_config is not None

    @property
    def run_count(self) -> int:
        return len(self.traces)

    def oom_count(self) -> int:
        return sum(1 for _, trace in self.traces if trace.outcome is Outcome.OOM_FAILED)


def run_oracle(
    scenario: ScenarioConfig,
    batch_grid: Sequence[int] = ORACLE_BATCH_GRID,
    buffer_grid: Sequence[int] = ORACLE_BUFFER_GRID,
) -> OracleResult:
    """Brute-force sweep of every (batch, buffer) grid point, one run each."""
    traces: list[tuple[tuple[int, int], RunTrace]] = []
    for batch in batch_grid:
        for buffer in buffer_grid:
            policy = BaselinePolicy.fixed(batch=batch, buffer=buffer)
            trace = run_baseline(policy, scenario)
            traces.append(((batch, buffer), trace))

    def quality(item):
        (batch, buffer), trace = item
        score = (trace.final_plasticity() + trace.final_stability()) / 2.0
        # Maximize score, then minimize latency, then smallest grid point.
        return (-score, trace.total_latency_s(), batch, buffer)

    completed = [item for item in traces if item[1].outcome is Outcome.COMPLETED]
    best_config = min(completed, key=quality)[0] if completed else None
    return OracleResult(best_config=best_config, traces=tuple(traces))
