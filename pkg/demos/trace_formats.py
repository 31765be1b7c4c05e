"""
Access traces on disk: binary and text round-trips
==================================================

Traces are numpy record arrays (cycle, page, op) and can be stored
either in a packed little-endian binary format (13 bytes per event,
magic-tagged) or as a plain `cycle,page,R|W` text file for quick
inspection and hand-editing.  Readers pick the format by extension.
"""

import os
import tempfile

import numpy as np

from tiersim.core import make_rng, read_trace, write_trace
from tiersim.workloads import GupsSpec, gen_gups

# -- generate a small hot-region GUPS trace -----------------------------

spec = GupsSpec(total_pages=512, events=2_000, hot_fraction=0.1,
                hot_access_prob=0.9)
trace = gen_gups(spec, make_rng(7, "workload"))
print(f"{trace.size} events over {np.unique(trace['page']).size} touched pages")
print(f"dtype: {trace.dtype}")

tmp = tempfile.mkdtemp(prefix="tiersim_demo_")
bin_path = os.path.join(tmp, "demo.bin")
txt_path = os.path.join(tmp, "demo.csv")

# -- binary: compact, exact --------------------------------------------

write_trace(trace, bin_path)
size = os.path.getsize(bin_path)
print(f"\nbinary: {size} bytes ({(size - 20) // trace.size} per event + 20 header)")
assert np.array_equal(read_trace(bin_path), trace)
print("binary round-trip: identical")

# -- text: readable, same information ------------------------------------

write_trace(trace, txt_path)
with open(txt_path) as fh:
    head = [next(fh).rstrip() for _ in range(4)]
print(f"\ntext ({os.path.getsize(txt_path)} bytes), first lines:")
for line in head:
    print(f"  {line}")
assert np.array_equal(read_trace(txt_path), trace)
print("text round-trip: identical")

# Events must be cycle-sorted to replay; the writer enforces that, and
# the hot-region structure is plain to see in the page column above.
