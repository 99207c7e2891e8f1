"""
The self-adaptive control loop
==============================

Runs the controller on a bundled scenario and prints the per-experience
trace: the knobs in effect, the health score against the decaying threshold,
and the resulting budget moves. The aggressive branch (score >= threshold)
grows the batch and replay budgets and enables the advanced optimizer; the
conservative branch shrinks them and drops back to the default optimizer.
"""

from oclbudget import build_environment, load_bundled_scenario, run_control_loop

scenario = load_bundled_scenario("xavier-er")
print(
    f"scenario {scenario.name}: {scenario.num_experiences} experiences, "
    f"{scenario.samples_per_experience} samples each, capacity "
    f"{scenario.platform.capacity_mb:.0f} MB, preference {list(scenario.preference)}"
)
print(
    f"budget cap {scenario.controller.budget_cap_mb:.1f} MB "
    f"(safety margin {scenario.controller.safety_margin:.0%})\n"
)

trace = run_control_loop(scenario, build_environment(scenario))

header = (
    f"{'e':>2} {'batch':>5} {'buffer':>6} {'opt':>8} {'score':>8} {'thresh':>8}"
    f" {'latency':>8} {'P':>6} {'S':>6} {'mem MB':>8} {'budgets MB (B/R/O)':>24}"
)
print(header)
print("-" * len(header))
for r in trace.records:
    b = r.budgets
    print(
        f"{r.experience:>2} {r.knobs.batch_size:>5} {r.knobs.buffer_size:>6}"
        f" {r.knobs.optimizer_mode.value:>8} {r.score.value:>8.5f} {r.threshold:>8.5f}"
        f" {r.snapshot.latency_s:>8.2f} {r.snapshot.plasticity:>6.3f}"
        f" {r.snapshot.stability:>6.3f} {r.memory_peak_mb:>8.1f}"
        f" {b.batch_mb:>8.1f}/{b.replay_mb:>6.1f}/{b.optimizer_mb:>7.1f}"
    )

print(f"\noutcome: {trace.outcome.value}")
print(f"total simulated latency: {trace.total_latency_s():.2f} s")
print(f"final plasticity {trace.final_plasticity():.4f}, stability {trace.final_stability():.4f}")
print(f"peak memory {trace.peak_memory_mb():.1f} MB (device capacity {scenario.platform.capacity_mb:.0f} MB)")

# The same scenario and seed always reproduce the same trace.
again = run_control_loop(scenario, build_environment(scenario))
print(f"\nre-run identical: {again == trace}")
