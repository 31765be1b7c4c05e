"""tiersim: trace-driven two-tier memory simulation.

A sketch-based hot-page detector with an always-correct one-sided count
estimate, emulations of the classic profiling alternatives (PTE scanning,
hint faults, PMU sampling), a quota-bounded migration simulator with
LRU-2Q cold detection, and a feedback policy that retunes the hotness
threshold from a histogram of sketch counters every migration interval.
"""

from .core import (
    EVENT_DTYPE,
    AccessEvent,
    ConfigError,
    Op,
    SimConfig,
    SimulationError,
    TraceFormatError,
    TraceIOError,
    make_rng,
    read_trace,
    write_trace,
)
from .harness import (
    EpochReport,
    ExperimentConfig,
    ExperimentResult,
    PolicyConfig,
    ProfilerConfig,
    SweepResult,
    TraceWorkload,
    build_trace,
    load_config,
    run_experiment,
    run_sweep,
    write_report,
    write_sweep_report,
)
from .harness import TOOL_VERSION as __version__
from .monitor import StateMonitor
from .policy import (
    DynamicThresholdPolicy,
    FixedThresholdPolicy,
    PolicyParams,
    PolicyState,
    fixed_threshold_policy,
    quantile,
    update_threshold,
)
from .profilers import (
    HintFaultProfiler,
    HotReport,
    NeoprofProfiler,
    PmuSampleProfiler,
    ProfilerKind,
    ProfilingCostModel,
    PteScanProfiler,
    profiler_collect,
    profiler_observe,
)
from .sketch import (
    H3HashFamily,
    Histogram,
    SketchDetector,
    SketchEntry,
    SketchParams,
    error_bound,
    h3_index,
)
from .tiers import (
    LatencyModel,
    ListKind,
    MigrationQuota,
    PageMeta,
    PromotionResult,
    Tier,
    TierState,
)
from .workloads import GupsSpec, ZipfSpec, gen_gups, gen_zipf
