"""
Fitting the response model to measured anchors
==============================================

The simulator's response surfaces are calibrated, not invented: latency and
memory trends over batch size, the saturating stability gain over buffer
size, and the cost of enabling the optimization plugins all come from a
declarative targets file. This demo fits the model, reports residuals, and
checks the fitted surfaces against the anchors.
"""

from oclbudget import (
    calibrate_profile,
    estimate_optimizer_ratio,
    load_calibration_targets,
)
from oclbudget.controller import OptimizerMode
from oclbudget.scenario import default_calibration_targets_path

targets = load_calibration_targets(default_calibration_targets_path())
print(f"targets: {len(targets.latency_points)} latency points, "
      f"{len(targets.memory_points)} memory points, "
      f"{len(targets.stability_points)} stability points")

result = calibrate_profile(targets)
profile, response = result.profile, result.response

print("\nfit residuals (max relative error per group):")
for group, residual in sorted(result.residuals.items()):
    print(f"  {group:10s} {residual:.4%}")

print("\nfitted parameters:")
print(f"  compute cost per sample   {profile.compute_cost_per_sample_s:.6g} s")
print(f"  compute-bound batch knee  {response.batch_knee}")
print(f"  activation per sample     {response.activation_mb_per_sample:.6g} MB")
print(f"  base memory               {profile.base_memory_mb:.6g} MB")
print(f"  plugin latency multiplier {profile.optimizer_latency_multiplier:.4f}")
print(f"  plugin memory delta       {profile.optimizer_memory_delta_mb:.1f} MB")
print(f"  stability gain limit      {response.stability_gain_max:.4f}")
print(f"  stability buffer scale    {response.stability_buffer_scale:.1f}")

n = targets.samples_per_experience
print("\nfitted latency/memory over batch size:")
for batch in (16, 32, 64, 128, 256, 512):
    lat = response.compute_latency_s(profile, batch, 0, OptimizerMode.DEFAULT, 1, n)
    mem = response.memory_mb(profile, batch, 0, OptimizerMode.DEFAULT)
    print(f"  B={batch:4d}  latency {lat:8.1f} s  memory {mem:7.1f} MB")

print("\nfitted stability gain over buffer size:")
for buffer in (10, 100, 1000, 10000, 100000):
    print(f"  R={buffer:7d}  gain {response.stability_gain(buffer):.4f}")

# The optimizer memory ratio can also be estimated at runtime from two
# probes of the memory model, one per optimizer mode.
ratio = estimate_optimizer_ratio(profile, response)
print(f"\ntwo-probe optimizer budget ratio estimate: {ratio:.4f}")
print(f"(direct from anchors: {(4100 + profile.optimizer_memory_delta_mb) / 4100:.4f})")
