"""Experiment harness: configuration, the profile -> classify -> migrate
loop, parameter sweeps, and report serialization.

An experiment is one trace replayed against one profiler backend and one
migration policy.  Simulated time is cycle-driven: ``cycles_per_ns``
converts trace cycles to nanoseconds, the migration interval defines the
epoch length, and each epoch ends with a profiler readout, a threshold
update, quota-bounded promotion/demotion, and (every clear interval) a
sketch reset.  Everything is deterministic given (config, seed): reports
contain no wall-clock values and rerunning a config yields byte-identical
CSV output.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, TextIO

import numpy as np

from .core import (
    EVENT_DTYPE,
    RNG_ALGORITHM,
    ConfigError,
    Op,
    SimConfig,
    SimulationError,
    TraceIOError,
    make_rng,
    read_trace,
)
from .monitor import StateMonitor
from .policy import DynamicThresholdPolicy, FixedThresholdPolicy, PolicyParams
from .profilers import (
    HintFaultProfiler,
    HotReport,
    NeoprofProfiler,
    PmuSampleProfiler,
    ProfilerKind,
    ProfilingCostModel,
    PteScanProfiler,
)
from .sketch import SketchDetector, SketchParams, error_bound
from .tiers import LatencyModel, MigrationQuota, Tier, TierState
from .workloads import GupsSpec, ZipfSpec, gen_gups, gen_zipf

TOOL_NAME = "tiersim"
TOOL_VERSION = "0.1.0"


# ---------------------------------------------------------------------------
# configuration


@dataclass
class TraceWorkload:
    """Replay an externally captured trace file instead of generating one."""

    path: str


Workload = GupsSpec | ZipfSpec | TraceWorkload


@dataclass
class ProfilerConfig:
    """Backend selection plus its knobs (only the active backend's knobs
    matter; intervals are simulated milliseconds)."""

    kind: ProfilerKind = ProfilerKind.NEOPROF
    scan_interval_ms: float = 5000.0
    promote_epochs: int = 2
    resample_interval_ms: float = 1000.0
    sample_fraction: float = 0.01
    hot_faults: int = 2
    sampling_rate: int = 200

    _FIELDS_BY_KIND = {
        ProfilerKind.NEOPROF: (),
        ProfilerKind.PTE_SCAN: ("scan_interval_ms", "promote_epochs"),
        ProfilerKind.HINT_FAULT: ("resample_interval_ms", "sample_fraction", "hot_faults"),
        ProfilerKind.PMU_SAMPLE: ("sampling_rate",),
    }

    def __post_init__(self) -> None:
        if self.scan_interval_ms <= 0 or self.resample_interval_ms <= 0:
            raise ConfigError("profiler intervals must be positive")

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind.value}
        for name in self._FIELDS_BY_KIND[self.kind]:
            out[name] = getattr(self, name)
        return out

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ProfilerConfig":
        d = dict(d)
        kind = ProfilerKind.from_name(d.pop("kind", "neoprof"))
        allowed = set(cls._FIELDS_BY_KIND[kind])
        unknown = set(d) - allowed
        if unknown:
            raise ConfigError(f"unknown {kind.value} profiler options: {sorted(unknown)}")
        return cls(kind=kind, **d)


@dataclass
class PolicyConfig:
    """Migration policy: ``dynamic`` (threshold tracks the counter
    histogram), ``fixed`` (constant theta), or ``none`` (first-touch,
    no migration at all)."""

    kind: str = "dynamic"
    theta: int = 100
    p_min: float = 0.0001
    p_max: float = 0.0156
    p_init: float = 0.001
    alpha: float = 1.0
    beta: float = 2.0

    _DYNAMIC_FIELDS = ("p_min", "p_max", "p_init", "alpha", "beta")

    def __post_init__(self) -> None:
        if self.kind not in ("dynamic", "fixed", "none"):
            raise ConfigError(f"unknown policy kind {self.kind!r}")
        if self.kind == "fixed" and self.theta < 1:
            raise ConfigError("fixed policy threshold must be >= 1")

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind}
        if self.kind == "fixed":
            out["theta"] = self.theta
        elif self.kind == "dynamic":
            for name in self._DYNAMIC_FIELDS:
                out[name] = getattr(self, name)
        return out

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "PolicyConfig":
        d = dict(d)
        kind = d.pop("kind", "dynamic")
        allowed = {"fixed": {"theta"}, "dynamic": set(cls._DYNAMIC_FIELDS), "none": set()}
        if kind not in allowed:
            raise ConfigError(f"unknown policy kind {kind!r}")
        unknown = set(d) - allowed[kind]
        if unknown:
            raise ConfigError(f"unknown {kind} policy options: {sorted(unknown)}")
        return cls(kind=kind, **d)

    @classmethod
    def from_flag(cls, text: str) -> "PolicyConfig":
        """Parse the CLI form: ``dynamic``, ``none``, or ``fixed:<theta>``."""
        if text in ("dynamic", "none"):
            return cls(kind=text)
        if text.startswith("fixed:"):
            try:
                return cls(kind="fixed", theta=int(text.split(":", 1)[1]))
            except ValueError:
                raise ConfigError(f"bad fixed threshold in {text!r}") from None
        raise ConfigError(f"bad policy {text!r}; expected dynamic, none, or fixed:<theta>")


_WORKLOAD_KINDS = {"gups": GupsSpec, "zipf": ZipfSpec, "trace": TraceWorkload}


def workload_from_dict(d: dict[str, Any]) -> Workload:
    d = dict(d)
    kind = d.pop("kind", None)
    if kind not in _WORKLOAD_KINDS:
        raise ConfigError(f"workload kind must be one of {sorted(_WORKLOAD_KINDS)}")
    if kind == "zipf" and "phase_shifts" in d:
        d["phase_shifts"] = [tuple(x) for x in d["phase_shifts"]]
    try:
        return _WORKLOAD_KINDS[kind](**d)
    except TypeError as exc:
        raise ConfigError(f"bad {kind} workload: {exc}") from None


def workload_to_dict(w: Workload) -> dict[str, Any]:
    for kind, klass in _WORKLOAD_KINDS.items():
        if isinstance(w, klass):
            out = dataclasses.asdict(w)
            if isinstance(w, ZipfSpec):
                out["phase_shifts"] = [list(x) for x in w.phase_shifts]
            return {"kind": kind, **out}
    raise ConfigError(f"not a workload: {w!r}")


@dataclass
class ExperimentConfig:
    """Everything one simulation run depends on."""

    sim: SimConfig
    workload: Workload
    profiler: ProfilerConfig = field(default_factory=ProfilerConfig)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    sketch: SketchParams = field(default_factory=SketchParams)
    migration_interval_ms: float = 10.0
    clear_interval_ms: float = 5000.0
    m_quota_pages_per_s: float = 65536.0
    cycles_per_ns: float = 1.0
    cpu_cycles_per_ns: float = 1.0
    watermark_fraction: float = 0.01
    transfer_cycles_per_access: int = 4
    migration_cost_ns_per_page: float = 3000.0
    costs: ProfilingCostModel = field(default_factory=ProfilingCostModel)

    def __post_init__(self) -> None:
        if self.migration_interval_ms <= 0 or self.clear_interval_ms <= 0:
            raise ConfigError("intervals must be positive")
        if self.cycles_per_ns <= 0 or self.cpu_cycles_per_ns <= 0:
            raise ConfigError("cycle/ns conversion constants must be positive")
        if self.m_quota_pages_per_s <= 0:
            raise ConfigError("m_quota_pages_per_s must be positive")
        if not 0.0 <= self.watermark_fraction < 1.0:
            raise ConfigError("watermark_fraction must be in [0, 1)")
        if self.transfer_cycles_per_access < 0 or self.migration_cost_ns_per_page < 0:
            raise ConfigError("cost constants must be nonnegative")
        if self.policy.kind == "dynamic" and self.profiler.kind is not ProfilerKind.NEOPROF:
            raise ConfigError(
                "dynamic policy needs the sketch profiler's histogram; "
                "use policy fixed:<theta> or none with baseline profilers"
            )
        if isinstance(self.workload, (GupsSpec, ZipfSpec)):
            if self.workload.total_pages > self.sim.total_pages:
                raise ConfigError(
                    f"workload touches {self.workload.total_pages} pages but the "
                    f"tiers hold only {self.sim.total_pages}"
                )

    # -- derived quantities -------------------------------------------

    @property
    def epoch_cycles(self) -> int:
        return max(1, round(self.migration_interval_ms * 1e6 * self.cycles_per_ns))

    @property
    def clear_cycles(self) -> int:
        return max(1, round(self.clear_interval_ms * 1e6 * self.cycles_per_ns))

    @property
    def quota_per_epoch(self) -> int:
        return math.ceil(self.m_quota_pages_per_s * self.migration_interval_ms / 1000.0)

    @property
    def watermark_pages(self) -> int:
        return math.ceil(self.watermark_fraction * self.sim.fast_pages)

    # -- (de)serialization ----------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        return {
            "sim": dataclasses.asdict(self.sim),
            "workload": workload_to_dict(self.workload),
            "profiler": self.profiler.to_dict(),
            "policy": self.policy.to_dict(),
            "sketch": dataclasses.asdict(self.sketch),
            "migration_interval_ms": self.migration_interval_ms,
            "clear_interval_ms": self.clear_interval_ms,
            "m_quota_pages_per_s": self.m_quota_pages_per_s,
            "cycles_per_ns": self.cycles_per_ns,
            "cpu_cycles_per_ns": self.cpu_cycles_per_ns,
            "watermark_fraction": self.watermark_fraction,
            "transfer_cycles_per_access": self.transfer_cycles_per_access,
            "migration_cost_ns_per_page": self.migration_cost_ns_per_page,
            "costs": dataclasses.asdict(self.costs),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ExperimentConfig":
        d = dict(d)
        try:
            sim = SimConfig(**d.pop("sim"))
        except KeyError:
            raise ConfigError("config needs a 'sim' section") from None
        except TypeError as exc:
            raise ConfigError(f"bad sim section: {exc}") from None
        try:
            workload = workload_from_dict(d.pop("workload"))
        except KeyError:
            raise ConfigError("config needs a 'workload' section") from None
        kwargs: dict[str, Any] = {}
        parsers = {
            "profiler": ProfilerConfig.from_dict,
            "policy": PolicyConfig.from_dict,
            "sketch": lambda s: _dataclass_from_dict(SketchParams, s, "sketch"),
            "costs": lambda s: _dataclass_from_dict(ProfilingCostModel, s, "costs"),
        }
        for key, parse in parsers.items():
            if key in d:
                kwargs[key] = parse(d.pop(key))
        scalars = {
            "migration_interval_ms", "clear_interval_ms", "m_quota_pages_per_s",
            "cycles_per_ns", "cpu_cycles_per_ns", "watermark_fraction",
            "transfer_cycles_per_access", "migration_cost_ns_per_page",
        }
        for key in list(d):
            if key in scalars:
                kwargs[key] = d.pop(key)
        if d:
            raise ConfigError(f"unknown config keys: {sorted(d)}")
        return cls(sim=sim, workload=workload, **kwargs)

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def _dataclass_from_dict(klass, d: dict[str, Any], what: str):
    try:
        return klass(**d)
    except TypeError as exc:
        raise ConfigError(f"bad {what} section: {exc}") from None


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise TraceIOError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    return ExperimentConfig.from_dict(doc)


# ---------------------------------------------------------------------------
# running


@dataclass
class EpochReport:
    """One migration interval's worth of observable state.

    ``theta``/``p`` are the policy state after this epoch's update (the
    values governing the next epoch); ``error_bound`` is read from the
    histogram before any coincident sketch reset.
    """

    epoch: int
    time_ns: float
    fast_accesses: int
    slow_accesses: int
    promotions: int
    demotions: int
    pingpongs: int
    theta: int
    p: float
    bandwidth_util: float
    read_fraction: float
    error_bound: int
    profiling_cost_cycles: int
    cumulative_latency_ns: float


REPORT_FIELDS = [f.name for f in dataclasses.fields(EpochReport)]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    reports: list[EpochReport]
    summary: dict[str, Any]
    metadata: dict[str, Any]


def build_trace(cfg: ExperimentConfig) -> np.ndarray:
    """Generate (or load) the configured workload's trace."""
    w = cfg.workload
    if isinstance(w, GupsSpec):
        return gen_gups(w, make_rng(cfg.sim.rng_seed, "workload"))
    if isinstance(w, ZipfSpec):
        return gen_zipf(w, make_rng(cfg.sim.rng_seed, "workload"))
    trace = read_trace(w.path)
    return trace


def _validate_trace_for_run(trace: np.ndarray, cfg: ExperimentConfig) -> None:
    if trace.dtype != EVENT_DTYPE:
        raise ConfigError(f"trace must have dtype {EVENT_DTYPE}")
    if trace.size == 0:
        return
    cycles = trace["cycle"].astype(np.int64)
    if np.any(np.diff(cycles) < 0):
        raise ConfigError("trace is not sorted by cycle")
    if int(trace["page"].max()) >= cfg.sim.total_pages:
        raise SimulationError(
            f"trace page {int(trace['page'].max())} outside the "
            f"{cfg.sim.total_pages}-page address space"
        )


def _build_profiler(cfg: ExperimentConfig, initial_theta: int):
    n_pages = cfg.sim.total_pages
    pc = cfg.profiler
    cyc_per_ms = cfg.cycles_per_ns * 1e6
    if pc.kind is ProfilerKind.NEOPROF:
        detector = SketchDetector(cfg.sketch, page_bits=cfg.sim.page_bits,
                                  seed=cfg.sim.rng_seed)
        return NeoprofProfiler(detector, cfg.costs, threshold=initial_theta)
    if pc.kind is ProfilerKind.PTE_SCAN:
        return PteScanProfiler(
            n_pages,
            scan_interval=max(1, round(pc.scan_interval_ms * cyc_per_ms)),
            promote_epochs=pc.promote_epochs,
            costs=cfg.costs,
        )
    if pc.kind is ProfilerKind.HINT_FAULT:
        return HintFaultProfiler(
            n_pages,
            resample_interval=max(1, round(pc.resample_interval_ms * cyc_per_ms)),
            sample_fraction=pc.sample_fraction,
            hot_faults=pc.hot_faults,
            rng=make_rng(cfg.sim.rng_seed, "hint-fault"),
            costs=cfg.costs,
        )
    return PmuSampleProfiler(n_pages, sampling_rate=pc.sampling_rate, costs=cfg.costs)


def _build_policy(cfg: ExperimentConfig):
    p = cfg.policy
    if p.kind == "none":
        return None
    if p.kind == "fixed":
        return FixedThresholdPolicy(p.theta)
    params = PolicyParams(
        p_min=p.p_min, p_max=p.p_max, p_init=p.p_init, alpha=p.alpha, beta=p.beta,
        m_quota_pages_per_s=cfg.m_quota_pages_per_s,
        update_interval_ms=cfg.migration_interval_ms,
    )
    return DynamicThresholdPolicy(params)


def _metadata(cfg: ExperimentConfig) -> dict[str, Any]:
    return {
        "tool": TOOL_NAME,
        "version": TOOL_VERSION,
        "config_hash": cfg.config_hash(),
        "seed": cfg.sim.rng_seed,
        "rng": RNG_ALGORITHM,
        "profiler": cfg.profiler.kind.value,
        "policy": cfg.policy.kind,
        "migration_cost_ns_per_page": cfg.migration_cost_ns_per_page,
    }


def run_experiment(cfg: ExperimentConfig, trace: np.ndarray | None = None) -> ExperimentResult:
    """Replay the trace epoch by epoch (profile, classify, migrate).

    The per-epoch sequence: feed accesses to the tier state, monitor, and
    profiler; collect the profiler's hot report; sample the monitor; read
    the sketch histogram (before any reset); update the policy threshold
    with the previous period's migration stats; promote within quota and
    demote back to the free watermark; reset the sketch at clear-interval
    boundaries.
    """
    if trace is None:
        trace = build_trace(cfg)
    _validate_trace_for_run(trace, cfg)

    tier = TierState(cfg.sim, LatencyModel.from_sim_config(cfg.sim, cfg.migration_cost_ns_per_page))
    monitor = StateMonitor(cfg.transfer_cycles_per_access)
    policy = _build_policy(cfg)
    theta = policy.theta if policy is not None else 0
    profiler = _build_profiler(cfg, theta) if policy is not None else None
    detector = profiler.detector if isinstance(profiler, NeoprofProfiler) else None
    quota = MigrationQuota(cfg.m_quota_pages_per_s, epoch_budget=cfg.quota_per_epoch)
    needs_residency = profiler is not None and not isinstance(profiler, NeoprofProfiler)

    epoch_cycles = cfg.epoch_cycles
    cycles = trace["cycle"].astype(np.int64)
    pages = trace["page"].astype(np.int64)
    ops = trace["op"]
    n_epochs = 0 if trace.size == 0 else int(cycles[-1]) // epoch_cycles + 1
    bounds = np.searchsorted(cycles, np.arange(1, n_epochs + 1) * epoch_cycles)

    reports: list[EpochReport] = []
    cumulative_latency = 0.0
    prev_migrated = 0
    prev_pingpong_ratio = 0.0
    next_clear = cfg.clear_cycles
    lo = 0
    for epoch in range(n_epochs):
        hi = int(bounds[epoch])
        seg_cycles = cycles[lo:hi]
        seg_pages = pages[lo:hi]
        seg_ops = ops[lo:hi]
        lo = hi
        now = (epoch + 1) * epoch_cycles

        latency, n_fast, n_slow, slow_mask = tier.access_batch(seg_cycles, seg_pages)
        if n_slow:
            slow_ops = seg_ops[slow_mask]
            slow_reads = int(np.count_nonzero(slow_ops == Op.READ))
            monitor.record_batch(slow_reads, n_slow - slow_reads,
                                 int(seg_cycles[slow_mask][-1]))
        if profiler is not None:
            profiler.observe_batch(seg_cycles, seg_pages, slow_mask)

        slow_resident = (tier.tier == Tier.SLOW) if needs_residency else None
        if profiler is not None:
            hot = profiler.collect(now, theta, epoch, slow_resident)
        else:
            hot = HotReport(np.empty(0, dtype=np.int64), epoch, 0)
        bandwidth, read_fraction = monitor.sample_and_reset(now)
        if detector is not None:
            hist = detector.compute_histogram()
            e_bound = error_bound(hist, cfg.sketch)
        else:
            hist, e_bound = None, 0
        if policy is not None:
            theta = policy.update(hist, bandwidth, prev_pingpong_ratio, e_bound, prev_migrated)
            if isinstance(profiler, NeoprofProfiler):
                profiler.threshold = theta

        quota.start_epoch()
        if policy is not None:
            tier.promote(hot.pages, quota)
            if cfg.watermark_pages:
                tier.demote_cold(cfg.watermark_pages, quota)
        promotions, demotions, pingpongs = tier.take_epoch_counters()
        prev_migrated = promotions + demotions
        prev_pingpong_ratio = pingpongs / promotions if promotions else 0.0

        if profiler is not None and now >= next_clear:
            profiler.clear()
            next_clear = (now // cfg.clear_cycles + 1) * cfg.clear_cycles

        cumulative_latency += (
            latency
            + (promotions + demotions) * cfg.migration_cost_ns_per_page
            + hot.profiling_cost_cycles / cfg.cpu_cycles_per_ns
        )
        reports.append(
            EpochReport(
                epoch=epoch,
                time_ns=now / cfg.cycles_per_ns,
                fast_accesses=n_fast,
                slow_accesses=n_slow,
                promotions=promotions,
                demotions=demotions,
                pingpongs=pingpongs,
                theta=theta,
                p=float(policy.p) if policy is not None else 0.0,
                bandwidth_util=bandwidth,
                read_fraction=read_fraction,
                error_bound=e_bound,
                profiling_cost_cycles=hot.profiling_cost_cycles,
                cumulative_latency_ns=cumulative_latency,
            )
        )

    summary = _summarize(trace.size, reports)
    return ExperimentResult(cfg, reports, summary, _metadata(cfg))


def _summarize(n_events: int, reports: list[EpochReport]) -> dict[str, Any]:
    fast = sum(r.fast_accesses for r in reports)
    slow = sum(r.slow_accesses for r in reports)
    total = fast + slow
    cumulative = reports[-1].cumulative_latency_ns if reports else 0.0
    return {
        "events": n_events,
        "epochs": len(reports),
        "fast_accesses": fast,
        "slow_accesses": slow,
        "slow_access_fraction": slow / total if total else 0.0,
        "promotions": sum(r.promotions for r in reports),
        "demotions": sum(r.demotions for r in reports),
        "pingpongs": sum(r.pingpongs for r in reports),
        "profiling_cost_cycles": sum(r.profiling_cost_cycles for r in reports),
        "cumulative_latency_ns": cumulative,
        "latency_ns_per_access": cumulative / total if total else 0.0,
        "mean_bandwidth_util": (
            sum(r.bandwidth_util for r in reports) / len(reports) if reports else 0.0
        ),
        "mean_error_bound": (
            sum(r.error_bound for r in reports) / len(reports) if reports else 0.0
        ),
        "final_error_bound": reports[-1].error_bound if reports else 0,
        "final_theta": reports[-1].theta if reports else 0,
    }


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class SweepResult:
    axis: str
    values: list[Any]
    summaries: list[dict[str, Any]]
    metadata: dict[str, Any]


def _set_by_path(doc: dict[str, Any], path: str, value: Any) -> None:
    keys = path.split(".")
    node = doc
    for key in keys[:-1]:
        if not isinstance(node.get(key), dict):
            raise ConfigError(f"unknown sweep axis {path!r}")
        node = node[key]
    # unknown leaves are caught by ExperimentConfig.from_dict validation
    node[keys[-1]] = value


def run_sweep(base: ExperimentConfig, axis: str, values: list[Any]) -> SweepResult:
    """One run per value (dotted config path), same seed throughout."""
    if not values:
        raise ConfigError("sweep needs at least one value")
    summaries = []
    for value in values:
        doc = base.to_dict()
        _set_by_path(doc, axis, value)
        cfg = ExperimentConfig.from_dict(doc)
        summaries.append(run_experiment(cfg).summary)
    return SweepResult(
        axis=axis,
        values=list(values),
        summaries=summaries,
        metadata={**_metadata(base), "axis": axis},
    )


# ---------------------------------------------------------------------------
# report files


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(fh: TextIO, metadata: dict[str, Any], header: list[str],
               rows: list[list[Any]]) -> None:
    for key in sorted(metadata):
        fh.write(f"# {key}={metadata[key]}\n")
    fh.write(",".join(header) + "\n")
    for row in rows:
        fh.write(",".join(_fmt(v) for v in row) + "\n")


def result_to_dict(result: ExperimentResult) -> dict[str, Any]:
    return {
        "metadata": result.metadata,
        "config": result.config.to_dict(),
        "summary": result.summary,
        "epochs": [dataclasses.asdict(r) for r in result.reports],
    }


def write_report(result: ExperimentResult, out: str | Path | TextIO,
                 fmt: str = "csv") -> None:
    """Serialize a run: csv (metadata comments + one row per epoch) or
    json (metadata, config, summary, epoch rows)."""
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown report format {fmt!r}")

    def emit(fh: TextIO) -> None:
        if fmt == "csv":
            rows = [[getattr(r, name) for name in REPORT_FIELDS] for r in result.reports]
            _write_csv(fh, result.metadata, REPORT_FIELDS, rows)
        else:
            json.dump(result_to_dict(result), fh, indent=2, sort_keys=True)
            fh.write("\n")

    _to_sink(out, emit)


def write_sweep_report(sweep: SweepResult, out: str | Path | TextIO,
                       fmt: str = "csv") -> None:
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown report format {fmt!r}")
    summary_keys = list(sweep.summaries[0]) if sweep.summaries else []

    def emit(fh: TextIO) -> None:
        if fmt == "csv":
            header = [sweep.axis] + summary_keys
            rows = [
                [value] + [summary[k] for k in summary_keys]
                for value, summary in zip(sweep.values, sweep.summaries)
            ]
            _write_csv(fh, sweep.metadata, header, rows)
        else:
            doc = {
                "metadata": sweep.metadata,
                "axis": sweep.axis,
                "points": [
                    {"value": v, "summary": s}
                    for v, s in zip(sweep.values, sweep.summaries)
                ],
            }
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")

    _to_sink(out, emit)


def _to_sink(out: str | Path | TextIO, emit) -> None:
    if hasattr(out, "write"):
        emit(out)
        return
    try:
        with open(out, "w", encoding="ascii") as fh:
            emit(fh)
    except OSError as exc:
        raise TraceIOError(f"cannot write report {out}: {exc}") from exc
