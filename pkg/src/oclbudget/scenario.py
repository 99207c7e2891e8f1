"""Scenario files: the declarative description of one simulated OCL run.

A scenario names a platform preset and an algorithm profile from the profile
library, sets the workload size and seed, picks a preference ordering, and
parameterizes the controller. Per-item memory costs and the optimizer budgets
default to values consistent with the referenced profile, which is what makes
the controller's budget arithmetic line up with the simulator's memory model
(and hence makes the capacity projection an actual OOM guarantee).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .controller import BudgetState, ControllerConfig
from .errors import SchemaError
from .metrics import Thresholds
from .simulator import (
    AlgorithmProfile,
    PlatformPreset,
    PrefetchModel,
    ProfileLibrary,
    ResponseModel,
    SimulatedEnvironment,
    load_profile_library,
)
from .urge import METRIC_NAMES
from .yamlcfg import Section, check_schema_version, load_yaml_mapping

PREFERENCE_PRESETS: dict[str, tuple[str, ...]] = {
    "balanced": ("memory", "plasticity", "stability", "latency"),
    "prefer-latency": ("latency", "memory", "plasticity", "stability"),
    "prefer-ps": ("plasticity", "stability", "memory", "latency"),
}


@dataclass(frozen=True)
class FixedKnobPreset:
    batch: int
    buffer: int


@dataclass(frozen=True)
class BaselinePresets:
    """Fixed-policy knob presets a scenario carries for the baselines."""

    max_a: FixedKnobPreset
    max_p: FixedKnobPreset
    fixed: FixedKnobPreset


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    platform: PlatformPreset
    profile_name: str
    profile: AlgorithmProfile
    response: ResponseModel
    num_experiences: int
    samples_per_experience: int
    seed: int
    preference: tuple[str, str, str, str]
    normalize_deviations: bool
    prefetch: PrefetchModel
    thresholds: Thresholds
    controller: ControllerConfig
    initial_batch_mb: float
    initial_replay_mb: float
    baselines: BaselinePresets

    def initial_budget_state(self) -> BudgetState:
        return BudgetState(
            batch_mb=self.initial_batch_mb,
            replay_mb=self.initial_replay_mb,
            optimizer_mb=self.controller.optimizer_default_mb,
            step=0,
        )

    def with_preference(self, preference) -> "ScenarioConfig":
        return dataclasses.replace(self, preference=resolve_preference(preference))

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return dataclasses.replace(self, seed=int(seed))

    def with_prefetch_enabled(self, enabled: bool) -> "ScenarioConfig":
        prefetch = dataclasses.replace(self.prefetch, enabled=bool(enabled))
        return dataclasses.replace(self, prefetch=prefetch)


def resolve_preference(preference) -> tuple[str, str, str, str]:
    """Accept a preset name or an explicit 4-item ordering."""
    if isinstance(preference, str):
        if preference not in PREFERENCE_PRESETS:
            raise SchemaError(
                f"unknown preference preset {preference!r}; "
                f"known presets: {sorted(PREFERENCE_PRESETS)}"
            )
        return PREFERENCE_PRESETS[preference]
    names = tuple(str(p) for p in preference)
    if sorted(names) != sorted(METRIC_NAMES):
        raise SchemaError(
            f"preference must be a permutation of {METRIC_NAMES}, got {list(names)}"
        )
    return names


def default_profile_library_path() -> Path:
    return Path(resources.files("oclbudget").joinpath("data/profiles.yaml"))


def default_calibration_targets_path() -> Path:
    return Path(resources.files("oclbudget").joinpath("data/calibration_targets.yaml"))


def bundled_scenario_dir() -> Path:
    return Path(resources.files("oclbudget").joinpath("data/scenarios"))


def bundled_scenario_names() -> list[str]:
    return sorted(p.stem for p in bundled_scenario_dir().glob("*.yaml"))


def bundled_scenario_path(name: str) -> Path:
    path = bundled_scenario_dir() / f"{name}.yaml"
    if not path.exists():
        raise SchemaError(
            f"no bundled scenario {name!r}; available: {bundled_scenario_names()}"
        )
    return path


_library_cache: dict[str, ProfileLibrary] = {}


def _library(path: str | Path | None) -> ProfileLibrary:
    resolved = str(Path(path) if path is not None else default_profile_library_path())
    if resolved not in _library_cache:
        _library_cache[resolved] = load_profile_library(resolved)
    return _library_cache[resolved]


def load_scenario(path: str | Path, *, library_path: str | Path | None = None) -> ScenarioConfig:
    """Load and validate one scenario file; unknown keys are rejected."""
    library = _library(library_path)
    doc = load_yaml_mapping(path)
    label = str(path)
    check_schema_version(doc, label)
    root = Section(doc, label)

    name = root.take("name", kind=str)
    platform_name = root.take("platform", kind=str)
    if platform_name not in library.platforms:
        raise SchemaError(
            f"{label}.platform: unknown platform {platform_name!r}; "
            f"available: {sorted(library.platforms)}"
        )
    platform = library.platforms[platform_name]

    profile_name = root.take("profile", kind=str)
    if profile_name not in library.profiles:
        raise SchemaError(
            f"{label}.profile: unknown profile {profile_name!r}; "
            f"available: {sorted(library.profiles)}"
        )
    profile, response = library.profiles[profile_name]

    num_experiences = root.take_int("num_experiences", minimum=1)
    samples = root.take_int("samples_per_experience", minimum=1)
    seed = root.take_int("seed", minimum=0)
    preference = resolve_preference(root.take("preference", kind=(str, list)))
    normalize = root.take("normalize_deviations", kind=bool, default=True)

    prefetch_sec = root.section("prefetch")
    prefetch = PrefetchModel(
        load_time_per_sample_s=platform.load_time_per_sample_s,
        overlap_efficiency=prefetch_sec.take_number(
            "overlap_efficiency", default=0.85, minimum=0.0, maximum=1.0
        ),
        enabled=prefetch_sec.take("enabled", kind=bool, default=True),
    )
    prefetch_sec.finish()

    th = root.section("thresholds")
    memory_mb = th.take_number("memory_mb", default=None, minimum=1.0)
    thresholds = Thresholds(
        plasticity=th.take_number("plasticity", minimum=0.0, maximum=1.0),
        stability=th.take_number("stability", minimum=0.0, maximum=1.0),
        latency_s=th.take_number("latency_s", minimum=0.0),
        memory_mb=platform.capacity_mb if memory_mb is None else memory_mb,
    )
    th.finish()

    ctrl = root.section("controller")
    optimizer_default = ctrl.take_number(
        "optimizer_default_mb", default=profile.base_memory_mb, minimum=1e-9
    )
    default_ratio = (
        (profile.base_memory_mb + profile.optimizer_memory_delta_mb)
        / profile.base_memory_mb
        if profile.base_memory_mb > 0
        else 1.0
    )
    config = ControllerConfig(
        initial_threshold=ctrl.take_number("initial_threshold", minimum=1e-12, maximum=1.0),
        threshold_decay=ctrl.take_number("threshold_decay", minimum=0.0),
        batch_sensitivity=ctrl.take_number("batch_sensitivity", minimum=0.0),
        replay_sensitivity=ctrl.take_number("replay_sensitivity", minimum=0.0),
        batch_sample_mb=ctrl.take_number(
            "batch_sample_mb", default=response.activation_mb_per_sample, minimum=1e-9
        ),
        replay_frame_mb=ctrl.take_number(
            "replay_frame_mb", default=response.replay_frame_mb, minimum=1e-9
        ),
        optimizer_default_mb=optimizer_default,
        optimizer_ratio=ctrl.take_number("optimizer_ratio", default=default_ratio, minimum=1.0),
        capacity_mb=platform.capacity_mb,
        safety_margin=ctrl.take_number("safety_margin", default=0.05, minimum=0.0, maximum=0.99),
        min_batch=ctrl.take_int("min_batch", default=1, minimum=1),
        min_buffer=ctrl.take_int("min_buffer", default=1, minimum=1),
    )
    initial_batch_mb = ctrl.take_number("initial_batch_mb", minimum=0.0)
    initial_replay_mb = ctrl.take_number("initial_replay_mb", minimum=0.0)
    ctrl.finish()

    initial_total = initial_batch_mb + initial_replay_mb + config.optimizer_default_mb
    if initial_total > config.budget_cap_mb:
        raise SchemaError(
            f"{label}.controller: initial budgets total {initial_total:.1f} MB, "
            f"above the {config.budget_cap_mb:.1f} MB cap"
        )

    base_sec = root.section("baselines")

    def knob_preset(key: str, default_batch: int, default_buffer: int) -> FixedKnobPreset:
        sec = base_sec.section(key, default=None)
        if sec is None:
            return FixedKnobPreset(batch=default_batch, buffer=default_buffer)
        preset = FixedKnobPreset(
            batch=sec.take_int("batch", minimum=1),
            buffer=sec.take_int("buffer", minimum=1),
        )
        sec.finish()
        return preset

    baselines = BaselinePresets(
        max_a=knob_preset("max_a", 32, 1000),
        max_p=knob_preset("max_p", 1024, 10),
        fixed=knob_preset("fixed", 64, 2000),
    )
    base_sec.finish()
    root.finish()

    return ScenarioConfig(
        name=name,
        platform=platform,
        profile_name=profile_name,
        profile=profile,
        response=response,
        num_experiences=num_experiences,
        samples_per_experience=samples,
        seed=seed,
        preference=preference,
        normalize_deviations=normalize,
        prefetch=prefetch,
        thresholds=thresholds,
        controller=config,
        initial_batch_mb=initial_batch_mb,
        initial_replay_mb=initial_replay_mb,
        baselines=baselines,
    )


def load_bundled_scenario(name: str) -> ScenarioConfig:
    return load_scenario(bundled_scenario_path(name))


def build_environment(scenario: ScenarioConfig) -> SimulatedEnvironment:
    """Fresh single-owner environment for one run of this scenario."""
    return SimulatedEnvironment(
        profile=scenario.profile,
        response=scenario.response,
        capacity_mb=scenario.platform.capacity_mb,
        seed=scenario.seed,
        prefetch=scenario.prefetch,
        samples_per_experience=scenario.samples_per_experience,
        compute_scale=scenario.platform.compute_scale,
    )
