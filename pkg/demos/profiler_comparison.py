"""
Five ways to place pages, one workload
======================================

Runs the same shifting-GUPS workload under each profiling backend (and a
no-migration first-touch baseline) and tabulates where the accesses
landed, what migration traffic cost, and what the profiling itself cost.
"""

import dataclasses

from tiersim.core import SimConfig
from tiersim.harness import ExperimentConfig, PolicyConfig, ProfilerConfig, run_experiment
from tiersim.profilers import ProfilerKind
from tiersim.sketch import SketchParams
from tiersim.workloads import GupsSpec

TOTAL, FAST = 8192, 1638
WORKLOAD = GupsSpec(total_pages=TOTAL, events=400_000, hot_fraction=0.1,
                    hot_access_prob=0.9, shift_at=200_000)

BASE = ExperimentConfig(
    sim=SimConfig(fast_pages=FAST, slow_pages=TOTAL - FAST, rng_seed=11),
    workload=WORKLOAD,
    sketch=SketchParams(width=65536, depth=2, threshold_ceiling=15),
    migration_interval_ms=10.0,
    clear_interval_ms=50.0,
    cycles_per_ns=0.001,
)

SETUPS = {
    "neoprof+dynamic": (ProfilerConfig(kind=ProfilerKind.NEOPROF),
                        PolicyConfig(kind="dynamic")),
    "pte-scan": (ProfilerConfig(kind=ProfilerKind.PTE_SCAN, scan_interval_ms=50.0),
                 PolicyConfig(kind="fixed", theta=100)),
    "hint-fault": (ProfilerConfig(kind=ProfilerKind.HINT_FAULT,
                                  resample_interval_ms=20.0, sample_fraction=0.05),
                   PolicyConfig(kind="fixed", theta=100)),
    "pmu (k=20)": (ProfilerConfig(kind=ProfilerKind.PMU_SAMPLE, sampling_rate=20),
                   PolicyConfig(kind="fixed", theta=100)),
    "first-touch": (ProfilerConfig(kind=ProfilerKind.PTE_SCAN, scan_interval_ms=50.0),
                    PolicyConfig(kind="none")),
}

print(f"GUPS 90/10 on {TOTAL} pages, hot set relocates mid-trace; "
      f"fast tier {FAST} pages\n")
print(f"{'setup':<16} {'slow-share':>10} {'ns/access':>10} "
      f"{'migrations':>11} {'profiling-ms':>13}")
for name, (prof, pol) in SETUPS.items():
    cfg = dataclasses.replace(BASE, profiler=prof, policy=pol)
    s = run_experiment(cfg).summary
    print(f"{name:<16} {s['slow_access_fraction']:>10.3f} "
          f"{s['latency_ns_per_access']:>10.1f} "
          f"{s['promotions'] + s['demotions']:>11d} "
          f"{s['profiling_cost_cycles'] / cfg.cpu_cycles_per_ns / 1e6:>13.2f}")

print("\nThe sketch backend sees every slow-tier access, so it re-finds the"
      "\nrelocated hot set within a few epochs; scan- and sample-based"
      "\nbackends trade detection lag (or coverage) for their lower cost.")
