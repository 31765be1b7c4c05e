"""
Watching the promotion threshold adapt
======================================

The dynamic policy re-derives the hot threshold every epoch as a tail
quantile of the sketch's counter histogram, steering the promoted share
with bandwidth pressure, ping-pong feedback, and the migration quota.
Here the workload changes character mid-run -- a flat Zipf (s=0.7)
sharpens into a heavily skewed one (s=1.4) with the same rank-to-page
mapping -- and the trajectory shows both moods of the controller: busy
refinement while placement is still wrong, and backing off to the floor
once it is right.
"""

import os
import tempfile

import numpy as np

from tiersim.core import SimConfig, make_rng, write_trace
from tiersim.harness import (
    ExperimentConfig, PolicyConfig, ProfilerConfig, TraceWorkload, run_experiment,
)
from tiersim.sketch import SketchParams
from tiersim.workloads import ZipfSpec, gen_zipf

TOTAL, FAST, EVENTS = 4096, 1024, 600_000
HALF = EVENTS // 2

# -- two-phase trace: same page ranking, different skew -------------------

flat = gen_zipf(ZipfSpec(TOTAL, HALF, s=0.7), make_rng(1, "workload"))
sharp = gen_zipf(ZipfSpec(TOTAL, HALF, s=1.4), make_rng(1, "workload"))
sharp["cycle"] += HALF
path = os.path.join(tempfile.mkdtemp(prefix="tiersim_demo_"), "two_phase.bin")
write_trace(np.concatenate([flat, sharp]), path)

cfg = ExperimentConfig(
    sim=SimConfig(fast_pages=FAST, slow_pages=TOTAL - FAST, rng_seed=1),
    workload=TraceWorkload(path),
    profiler=ProfilerConfig(),                      # sketch backend
    policy=PolicyConfig(kind="dynamic"),
    sketch=SketchParams(width=65536, depth=2, threshold_ceiling=15),
    migration_interval_ms=10.0,                     # one epoch = 10 ms
    clear_interval_ms=50.0,
    cycles_per_ns=0.001,                            # 1 trace cycle = 1 us
)
result = run_experiment(cfg)

# -- per-epoch trajectory -------------------------------------------------

print(f"{EVENTS} events, {len(result.reports)} epochs, phase change at epoch "
      f"{HALF // cfg.epoch_cycles}")
print("\nepoch  theta      p  err  promo  demo  fast-share")
for r in result.reports[::3]:
    fast_share = r.fast_accesses / (r.fast_accesses + r.slow_accesses)
    print(f"{r.epoch:5d}  {r.theta:5d}  {r.p:.4f}  {r.error_bound:3d}"
          f"  {r.promotions:5d}  {r.demotions:4d}  {fast_share:10.3f}")

s = result.summary
print(f"\nslow-tier share overall: {s['slow_access_fraction']:.3f}")
print(f"latency per access:      {s['latency_ns_per_access']:.1f} ns")
print("\nIn the flat phase the controller works: theta rides the histogram"
      "\ntail while early promotions fix up the first-touch placement, then p"
      "\nsaturates and migrations taper off.  After the sharpening the top"
      "\nranks -- unchanged by the exponent shift -- are already fast-resident,"
      "\nso the sketch sees only cold tail traffic, theta falls to the floor,"
      "\nand the policy correctly leaves a good placement alone.")
