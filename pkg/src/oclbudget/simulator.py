"""Deterministic stand-in for on-device OCL training.

The environment maps (knobs, experience index) to latency, peak memory, and a
new accuracy-matrix row through a small family of response surfaces:

* latency: (n / B) * c_iter(B) * opt_mult(mode) * growth^(e-1) + R * replay_cost,
  with c_iter(B) = cost_per_sample * max(B, knee). Below the knee the device
  is latency-bound and iteration time is flat, so latency falls as 1/B; at
  the knee it goes compute-bound and latency flattens.
* memory: base + B * m_act + R * m_df + plugin_delta(mode) + residency(R),
  where residency is a quadratic term that only activates above a buffer
  threshold (the abrupt blow-up large buffers cause in practice).
* stability gain: s(R) = s_max * (1 - exp(-R / R0)), saturating.
* plasticity: the new diagonal accuracy rises with the number of gradient
  updates n / B with diminishing returns, so very large batches learn almost
  nothing in a single online pass; the advanced optimizer adds a flat bonus.

Off-diagonal accuracies decay multiplicatively each experience by
forgetting_rate * (1 - s(R)): bigger replay buffers attenuate forgetting.

Out-of-memory is exactly the predicate memory > capacity and is reported as
an outcome, never a silent clamp. Prefetch staging only changes latency:
a staged experience pays max(0, load - overlap_efficiency * compute) instead
of the full load.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.optimize import least_squares

from .controller import Knobs, OptimizerMode
from .errors import CalibrationError, SchemaError, SimulationStateError
from .metrics import AccuracyMatrix
from .yamlcfg import Section, check_schema_version, load_yaml_mapping


@dataclass(frozen=True)
class AlgorithmProfile:
    """Cost profile of one continual-learning algorithm."""

    name: str
    compute_cost_per_sample_s: float
    replay_sampling_cost_s: float
    optimizer_latency_multiplier: float  # advanced mode, >= 1
    optimizer_memory_delta_mb: float
    base_memory_mb: float  # model + framework
    per_experience_growth: float  # workload complexity drift, >= 1

    def __post_init__(self):
        if self.compute_cost_per_sample_s < 0 or self.replay_sampling_cost_s < 0:
            raise ValueError("costs must be >= 0")
        if self.optimizer_latency_multiplier < 1.0 or self.per_experience_growth < 1.0:
            raise ValueError("multipliers must be >= 1")
        if self.optimizer_memory_delta_mb < 0 or self.base_memory_mb < 0:
            raise ValueError("memory figures must be >= 0")


@dataclass(frozen=True)
class ResponseModel:
    """Response-surface parameters mapping knobs to latency/memory/accuracy."""

    activation_mb_per_sample: float  # per-sample batch memory
    replay_frame_mb: float  # per-frame replay memory
    batch_knee: int  # compute-bound knee
    buffer_spike_threshold: int  # residency term activates above this R
    buffer_spike_coeff: float  # MB per (frame above threshold)^2
    stability_gain_max: float  # s_max in [0, 1]
    stability_buffer_scale: float  # R0
    plasticity_max: float
    plasticity_updates_scale: float  # u0: gradient updates to near-saturation
    advanced_plasticity_bonus: float
    forgetting_rate: float  # per-experience decay at zero replay
    noise_fraction: float = 0.0  # seeded jitter on latency and new accuracy

    def __post_init__(self):
        if self.activation_mb_per_sample <= 0 or self.replay_frame_mb <= 0:
            raise ValueError("per-item memory costs must be > 0")
        if self.batch_knee < 1:
            raise ValueError("batch knee must be >= 1")
        if not 0.0 <= self.stability_gain_max <= 1.0:
            raise ValueError("stability gain bound must be in [0, 1]")
        if not 0.0 <= self.forgetting_rate <= 1.0:
            raise ValueError("forgetting rate must be in [0, 1]")
        if not 0.0 <= self.noise_fraction < 1.0:
            raise ValueError("noise fraction must be in [0, 1)")

    def compute_latency_s(
        self,
        profile: AlgorithmProfile,
        batch_size: int,
        buffer_size: int,
        mode: OptimizerMode,
        experience: int,
        n_samples: int,
        compute_scale: float = 1.0,
    ) -> float:
        """Training compute time, excluding data loading."""
        c_iter = profile.compute_cost_per_sample_s * max(batch_size, self.batch_knee)
        opt = (
            profile.optimizer_latency_multiplier
            if mode is OptimizerMode.ADVANCED
            else 1.0
        )
        growth = profile.per_experience_growth ** (experience - 1)
        stream = (n_samples / batch_size) * c_iter * opt * growth
        replay = buffer_size * profile.replay_sampling_cost_s
        return (stream + replay) * compute_scale

    def memory_mb(
        self,
        profile: AlgorithmProfile,
        batch_size: int,
        buffer_size: int,
        mode: OptimizerMode,
    ) -> float:
        plugin = (
            profile.optimizer_memory_delta_mb if mode is OptimizerMode.ADVANCED else 0.0
        )
        overhang = max(0, buffer_size - self.buffer_spike_threshold)
        residency = self.buffer_spike_coeff * overhang * overhang
        return (
            profile.base_memory_mb
            + batch_size * self.activation_mb_per_sample
            + buffer_size * self.replay_frame_mb
            + plugin
            + residency
        )

    def stability_gain(self, buffer_size: int) -> float:
        """Saturating forgetting attenuation in [0, s_max]; 0 at R = 0."""
        return self.stability_gain_max * (
            1.0 - math.exp(-buffer_size / self.stability_buffer_scale)
        )

    def plasticity_level(
        self, batch_size: int, mode: OptimizerMode, n_samples: int
    ) -> float:
        updates = n_samples / batch_size
        level = self.plasticity_max * (
            1.0 - math.exp(-updates / self.plasticity_updates_scale)
        )
        if mode is OptimizerMode.ADVANCED:
            level += self.advanced_plasticity_bonus
        return min(1.0, max(0.0, level))


@dataclass(frozen=True)
class PrefetchModel:
    """Pipeline overlap of data loading with training compute."""

    load_time_per_sample_s: float
    overlap_efficiency: float  # fraction of compute usable for loading
    enabled: bool = True

    def __post_init__(self):
        if self.load_time_per_sample_s < 0:
            raise ValueError("load time must be >= 0")
        if not 0.0 <= self.overlap_efficiency <= 1.0:
            raise ValueError("overlap efficiency must be in [0, 1]")

    def effective_latency_s(self, compute_s: float, load_s: float, staged: bool) -> float:
        if self.enabled and staged:
            return compute_s + max(0.0, load_s - self.overlap_efficiency * compute_s)
        return compute_s + load_s


@dataclass(frozen=True)
class PlatformPreset:
    """What a deployment platform contributes: capacity, speed, load rate."""

    name: str
    capacity_mb: float
    compute_scale: float
    load_time_per_sample_s: float

    def __post_init__(self):
        if self.capacity_mb <= 0 or self.compute_scale <= 0:
            raise ValueError("capacity and compute scale must be > 0")
        if self.load_time_per_sample_s < 0:
            raise ValueError("load time must be >= 0")


@dataclass(frozen=True)
class TrainResult:
    latency_s: Optional[float]
    memory_peak_mb: float
    accuracy_row: Optional[tuple[float, ...]]
    oom: bool


class SimulatedEnvironment:
    """Single-owner simulated training target for one run.

    Experiences must be trained strictly in order starting at 1. Once an OOM
    occurs the environment is failed and refuses further work.
    """

    def __init__(
        self,
        profile: AlgorithmProfile,
        response: ResponseModel,
        capacity_mb: float,
        seed: int,
        prefetch: PrefetchModel,
        samples_per_experience: int,
        compute_scale: float = 1.0,
    ):
        if capacity_mb <= 0:
            raise ValueError("capacity must be > 0")
        if samples_per_experience < 1:
            raise ValueError("samples per experience must be >= 1")
        self.profile = profile
        self.response = response
        self.capacity_mb = float(capacity_mb)
        self.prefetch = prefetch
        self.samples_per_experience = int(samples_per_experience)
        self.compute_scale = float(compute_scale)
        self.rng_seed = int(seed)
        self._rng = np.random.default_rng(self.rng_seed)
        self._matrix = AccuracyMatrix()
        self._staged: set[int] = set()
        self._failed = False

    @property
    def accuracy_matrix(self) -> AccuracyMatrix:
        return self._matrix

    @property
    def failed(self) -> bool:
        return self._failed

    @property
    def next_experience(self) -> int:
        return self._matrix.num_experiences_trained + 1

    def n_samples(self, experience: int) -> int:
        # Constant workload per experience; complexity drift is modeled by
        # the profile's growth factor instead.
        return self.samples_per_experience

    def prefetch_next(self, experience: int) -> None:
        """Stage data for an upcoming experience. Idempotent, purely logical."""
        if self._failed:
            raise SimulationStateError("environment already failed; cannot prefetch")
        self._staged.add(int(experience))

    def train_experience(self, experience: int, knobs: Knobs) -> TrainResult:
        if self._failed:
            raise SimulationStateError("environment already failed; cannot train")
        if experience != self.next_experience:
            raise SimulationStateError(
                f"expected experience {self.next_experience}, got {experience}"
            )
        if knobs.batch_size < 1 or knobs.buffer_size < 0:
            raise ValueError(f"invalid knobs {knobs}")

        b, r, mode = knobs.batch_size, knobs.buffer_size, knobs.optimizer_mode
        memory = self.response.memory_mb(self.profile, b, r, mode)
        if memory > self.capacity_mb:
            self._failed = True
            return TrainResult(None, memory, None, oom=True)

        n = self.n_samples(experience)
        compute = self.response.compute_latency_s(
            self.profile, b, r, mode, experience, n, self.compute_scale
        )
        load = n * self.prefetch.load_time_per_sample_s
        latency = self.prefetch.effective_latency_s(
            compute, load, staged=experience in self._staged
        )

        diagonal = self.response.plasticity_level(b, mode, n)
        decay = self.response.forgetting_rate * (1.0 - self.response.stability_gain(r))
        if self.response.noise_fraction > 0.0:
            jitter = self.response.noise_fraction
            latency *= 1.0 + jitter * self._rng.uniform(-1.0, 1.0)
            diagonal = min(1.0, max(0.0, diagonal * (1.0 + jitter * self._rng.uniform(-1.0, 1.0))))

        previous = self._matrix.row(experience - 1) if experience > 1 else ()
        row = tuple(v * (1.0 - decay) for v in previous) + (diagonal,)
        self._matrix.add_row(row)
        return TrainResult(latency, memory, row, oom=False)


def estimate_optimizer_ratio(
    profile: AlgorithmProfile,
    response: ResponseModel,
    batch_size: int = 32,
    buffer_size: int = 1000,
) -> float:
    """Probe the memory model once per optimizer mode and estimate the ratio
    between the advanced and default optimizer budgets.

    The non-batch, non-replay remainder is attributed to the optimizer, so
    the ratio is (base + plugin delta) / base measured from two probes.
    """
    per_knobs = batch_size * response.activation_mb_per_sample + (
        buffer_size * response.replay_frame_mb
    )
    m_default = response.memory_mb(profile, batch_size, buffer_size, OptimizerMode.DEFAULT)
    m_advanced = response.memory_mb(profile, batch_size, buffer_size, OptimizerMode.ADVANCED)
    default_budget = m_default - per_knobs
    advanced_budget = m_advanced - per_knobs
    if default_budget <= 0:
        raise ValueError("probe batch/buffer too large: nothing left for the optimizer")
    return advanced_budget / default_budget


# ---------------------------------------------------------------------------
# Calibration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CalibrationTargets:
    """Measured anchors a response model is fitted against.

    latency_points and memory_points are (batch_size, value) pairs at a fixed
    workload size; stability_points are (buffer_size, gain) pairs. The plugin
    pair gives latency/memory with the advanced optimizer off and on.
    """

    samples_per_experience: int
    latency_points: tuple[tuple[int, float], ...]
    memory_points: tuple[tuple[int, float], ...]
    stability_points: tuple[tuple[int, float], ...]
    plugin_latency_off_s: float
    plugin_latency_on_s: float
    plugin_memory_off_mb: float
    plugin_memory_on_mb: float


@dataclass(frozen=True)
class CalibrationResult:
    profile: AlgorithmProfile
    response: ResponseModel
    residuals: dict[str, float]  # max relative residual per fitted group


_RESIDUAL_LIMIT = 0.20

# Defaults for response fields the targets do not constrain.
_UNCONSTRAINED_DEFAULTS = dict(
    replay_frame_mb=0.045,
    buffer_spike_threshold=20000,
    buffer_spike_coeff=7.0e-7,
    plasticity_max=0.9,
    plasticity_updates_scale=45.0,
    advanced_plasticity_bonus=0.04,
    forgetting_rate=0.22,
    replay_sampling_cost_s=0.002,
    per_experience_growth=1.03,
)


def _validate_target_shapes(targets: CalibrationTargets) -> None:
    if len(targets.latency_points) < 3:
        raise CalibrationError("need latency targets at >= 3 batch sizes")
    if len(targets.memory_points) < 3:
        raise CalibrationError("need memory targets at >= 3 batch sizes")
    if len(targets.stability_points) < 3:
        raise CalibrationError("need stability targets at >= 3 buffer sizes")

    lat = sorted(targets.latency_points)
    if any(b2 <= b1 for (b1, _), (b2, _) in zip(lat, lat[1:])):
        raise CalibrationError("latency targets must use distinct batch sizes")
    if any(l2 >= l1 for (_, l1), (_, l2) in zip(lat, lat[1:])):
        raise CalibrationError(
            "latency targets must be strictly decreasing in batch size"
        )
    mem = sorted(targets.memory_points)
    if any(m2 <= m1 for (_, m1), (_, m2) in zip(mem, mem[1:])):
        raise CalibrationError(
            "memory targets must be strictly increasing in batch size"
        )
    stab = sorted(targets.stability_points)
    if any(s2 < s1 for (_, s1), (_, s2) in zip(stab, stab[1:])):
        raise CalibrationError(
            "stability targets must be non-decreasing in buffer size"
        )
    if any(not 0.0 <= s <= 1.0 for _, s in stab):
        raise CalibrationError("stability targets must lie in [0, 1]")
    if targets.plugin_latency_off_s <= 0 or targets.plugin_latency_on_s <= 0:
        raise CalibrationError("plugin latency targets must be > 0")
    if targets.plugin_latency_on_s < targets.plugin_latency_off_s:
        raise CalibrationError("plugin latency must not decrease when enabled")
    if targets.plugin_memory_on_mb < targets.plugin_memory_off_mb:
        raise CalibrationError("plugin memory must not decrease when enabled")


def calibrate_profile(targets: CalibrationTargets) -> CalibrationResult:
    """Least-squares fit of the response surfaces to measured anchors.

    Fits (cost_per_sample, knee) to the latency curve, (base, m_act) to the
    memory line, and (s_max, R0) to the stability saturation; the optimizer
    multiplier and memory delta come directly from the plugin pair. Fails
    with CalibrationError if any group's max relative residual exceeds 20%.
    """
    _validate_target_shapes(targets)
    n = targets.samples_per_experience

    # Latency: L(B) = n * c * max(1, knee / B), fitted in relative terms.
    lat_b = np.array([b for b, _ in targets.latency_points], dtype=float)
    lat_obs = np.array([v for _, v in targets.latency_points], dtype=float)

    def lat_residual(params):
        c, knee = params
        pred = n * c * np.maximum(1.0, knee / lat_b)
        return (pred - lat_obs) / lat_obs

    c0 = lat_obs.min() / n
    knee0 = float(lat_b[np.argmin(lat_obs)])
    fit = least_squares(
        lat_residual,
        x0=[c0, knee0],
        bounds=([1e-12, 1.0], [np.inf, 16.0 * lat_b.max()]),
    )
    cost_per_sample, knee = float(fit.x[0]), float(fit.x[1])
    lat_resid = float(np.max(np.abs(lat_residual(fit.x))))

    # Memory: M(B) = base + m_act * B, ordinary least squares.
    mem_b = np.array([b for b, _ in targets.memory_points], dtype=float)
    mem_obs = np.array([v for _, v in targets.memory_points], dtype=float)
    m_act, base = np.polyfit(mem_b, mem_obs, 1)
    if m_act <= 0 or base < 0:
        raise CalibrationError(
            f"memory fit produced non-physical parameters (slope {m_act:.4f}, base {base:.1f})"
        )
    mem_pred = base + m_act * mem_b
    mem_resid = float(np.max(np.abs((mem_pred - mem_obs) / mem_obs)))

    # Stability: s(R) = s_max * (1 - exp(-R / R0)).
    stab_r = np.array([r for r, _ in targets.stability_points], dtype=float)
    stab_obs = np.array([v for _, v in targets.stability_points], dtype=float)

    def stab_residual(params):
        s_max, r0 = params
        return s_max * (1.0 - np.exp(-stab_r / r0)) - stab_obs

    fit = least_squares(
        stab_residual,
        x0=[max(stab_obs.max(), 0.5), float(np.median(stab_r))],
        bounds=([1e-6, 1.0], [1.0, 1e9]),
    )
    s_max, r0 = float(fit.x[0]), float(fit.x[1])
    denom = np.maximum(stab_obs, 1e-3)
    stab_resid = float(np.max(np.abs(stab_residual(fit.x) / denom)))

    # Plugin costs fall straight out of the on/off pair.
    opt_multiplier = targets.plugin_latency_on_s / targets.plugin_latency_off_s
    opt_delta = targets.plugin_memory_on_mb - targets.plugin_memory_off_mb

    residuals = {"latency": lat_resid, "memory": mem_resid, "stability": stab_resid}
    worst = max(residuals, key=residuals.get)
    if residuals[worst] > _RESIDUAL_LIMIT:
        raise CalibrationError(
            f"{worst} fit residual {residuals[worst]:.1%} exceeds {_RESIDUAL_LIMIT:.0%}"
        )

    d = _UNCONSTRAINED_DEFAULTS
    profile = AlgorithmProfile(
        name="calibrated",
        compute_cost_per_sample_s=cost_per_sample,
        replay_sampling_cost_s=d["replay_sampling_cost_s"],
        optimizer_latency_multiplier=max(1.0, opt_multiplier),
        optimizer_memory_delta_mb=opt_delta,
        base_memory_mb=float(base),
        per_experience_growth=d["per_experience_growth"],
    )
    response = ResponseModel(
        activation_mb_per_sample=float(m_act),
        replay_frame_mb=d["replay_frame_mb"],
        batch_knee=max(1, round(knee)),
        buffer_spike_threshold=d["buffer_spike_threshold"],
        buffer_spike_coeff=d["buffer_spike_coeff"],
        stability_gain_max=s_max,
        stability_buffer_scale=r0,
        plasticity_max=d["plasticity_max"],
        plasticity_updates_scale=d["plasticity_updates_scale"],
        advanced_plasticity_bonus=d["advanced_plasticity_bonus"],
        forgetting_rate=d["forgetting_rate"],
    )
    return CalibrationResult(profile=profile, response=response, residuals=residuals)


# ---------------------------------------------------------------------------
# Declarative file loaders
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProfileLibrary:
    """Everything the bundled profiles file provides."""

    platforms: dict[str, PlatformPreset]
    profiles: dict[str, tuple[AlgorithmProfile, ResponseModel]]


def load_profile_library(path: str | Path) -> ProfileLibrary:
    doc = load_yaml_mapping(path)
    label = str(path)
    check_schema_version(doc, label)
    root = Section(doc, label)

    platforms: dict[str, PlatformPreset] = {}
    platform_sec = root.section("platforms")
    for name in platform_sec.keys():
        sec = platform_sec.section(name)
        platforms[name] = PlatformPreset(
            name=name,
            capacity_mb=sec.take_number("capacity_mb", minimum=1.0),
            compute_scale=sec.take_number("compute_scale", minimum=1e-9),
            load_time_per_sample_s=sec.take_number("load_time_per_sample_s", minimum=0.0),
        )
        sec.finish()
    platform_sec.finish()

    profiles: dict[str, tuple[AlgorithmProfile, ResponseModel]] = {}
    profile_sec = root.section("profiles")
    for name in profile_sec.keys():
        sec = profile_sec.section(name)
        prof = AlgorithmProfile(
            name=name,
            compute_cost_per_sample_s=sec.take_number("compute_cost_per_sample_s", minimum=0.0),
            replay_sampling_cost_s=sec.take_number("replay_sampling_cost_s", minimum=0.0),
            optimizer_latency_multiplier=sec.take_number("optimizer_latency_multiplier", minimum=1.0),
            optimizer_memory_delta_mb=sec.take_number("optimizer_memory_delta_mb", minimum=0.0),
            base_memory_mb=sec.take_number("base_memory_mb", minimum=0.0),
            per_experience_growth=sec.take_number("per_experience_growth", minimum=1.0),
        )
        resp = ResponseModel(
            activation_mb_per_sample=sec.take_number("activation_mb_per_sample", minimum=1e-9),
            replay_frame_mb=sec.take_number("replay_frame_mb", minimum=1e-9),
            batch_knee=sec.take_int("batch_knee", minimum=1),
            buffer_spike_threshold=sec.take_int("buffer_spike_threshold", minimum=0),
            buffer_spike_coeff=sec.take_number("buffer_spike_coeff", minimum=0.0),
            stability_gain_max=sec.take_number("stability_gain_max", minimum=0.0, maximum=1.0),
            stability_buffer_scale=sec.take_number("stability_buffer_scale", minimum=1e-9),
            plasticity_max=sec.take_number("plasticity_max", minimum=0.0, maximum=1.0),
            plasticity_updates_scale=sec.take_number("plasticity_updates_scale", minimum=1e-9),
            advanced_plasticity_bonus=sec.take_number("advanced_plasticity_bonus", minimum=0.0),
            forgetting_rate=sec.take_number("forgetting_rate", minimum=0.0, maximum=1.0),
            noise_fraction=sec.take_number("noise_fraction", default=0.0, minimum=0.0),
        )
        sec.finish()
        profiles[name] = (prof, resp)
    profile_sec.finish()
    root.finish()
    return ProfileLibrary(platforms=platforms, profiles=profiles)


def load_calibration_targets(path: str | Path) -> CalibrationTargets:
    doc = load_yaml_mapping(path)
    label = str(path)
    check_schema_version(doc, label)
    root = Section(doc, label)

    def point_list(key: str) -> tuple[tuple[int, float], ...]:
        raw = root.take(key, kind=list)
        points = []
        for idx, pair in enumerate(raw):
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise SchemaError(f"{label}.{key}[{idx}]: expected a [size, value] pair")
            size, value = pair
            if not isinstance(size, int) or isinstance(size, bool) or size < 1:
                raise SchemaError(f"{label}.{key}[{idx}]: size must be a positive int")
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise SchemaError(f"{label}.{key}[{idx}]: value must be a number")
            points.append((size, float(value)))
        return tuple(points)

    samples = root.take_int("samples_per_experience", minimum=1)
    latency_points = point_list("latency_points")
    memory_points = point_list("memory_points")
    stability_points = point_list("stability_points")
    plugin = root.section("plugin")
    targets = CalibrationTargets(
        samples_per_experience=samples,
        latency_points=latency_points,
        memory_points=memory_points,
        stability_points=stability_points,
        plugin_latency_off_s=plugin.take_number("latency_without_s", minimum=0.0),
        plugin_latency_on_s=plugin.take_number("latency_with_s", minimum=0.0),
        plugin_memory_off_mb=plugin.take_number("memory_without_mb", minimum=0.0),
        plugin_memory_on_mb=plugin.take_number("memory_with_mb", minimum=0.0),
    )
    plugin.finish()
    root.finish()
    return targets
