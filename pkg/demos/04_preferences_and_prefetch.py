"""
User preferences and the prefetch pipeline
==========================================

Preference orderings reweight the health score, which shifts where the
controller settles: prioritizing latency converges to small replay buffers
and the default optimizer (fast, but forgetful), while prioritizing
plasticity/stability grows the buffer and keeps the advanced optimizer
resident (slower, but retains more). The balanced ordering lands in between.

The second half ablates the data prefetcher: staging the next experience's
data while the current one trains hides most of the loading time behind
compute.
"""

from oclbudget import ablate_prefetch, load_bundled_scenario, build_environment, run_control_loop

print("=== preference orderings (controller runs on each bundled 'er' scenario) ===")
for name in ("xavier-er", "orin-er", "server-er"):
    base = load_bundled_scenario(name)
    print(f"\n{name}:")
    for pref in ("prefer-latency", "balanced", "prefer-ps"):
        scenario = base.with_preference(pref)
        trace = run_control_loop(scenario, build_environment(scenario))
        advanced_steps = sum(
            1 for r in trace.records if r.knobs.optimizer_mode.value == "advanced"
        )
        print(
            f"  {pref:15s} latency {trace.total_latency_s():7.1f} s  "
            f"P {trace.final_plasticity():.3f}  S {trace.final_stability():.3f}  "
            f"final buffer {trace.records[-1].knobs.buffer_size:5d}  "
            f"advanced steps {advanced_steps:2d}/10"
        )

# Lower latency comes at the cost of plasticity and stability, and the
# buffer sizes tell the story: the latency-first run drains its replay
# budget once its latency target is met.

print("\n=== prefetch ablation (fixed knobs, pipeline effect only) ===")
for name in ("xavier-er", "orin-er", "server-er"):
    result = ablate_prefetch(load_bundled_scenario(name))
    print(
        f"  {name:10s} prefetch on {result.latency_prefetch_on_s:8.1f} s | "
        f"off {result.latency_prefetch_off_s:8.1f} s | reduction {result.reduction:.1%}"
    )
