"""Hot-page profiler backends behind one interface.

Four ways of finding promotion candidates, comparable under identical
traces:

* ``neoprof`` -- the device-side sketch detector; sees every slow-tier
  access exactly and reports threshold crossings as they happen.
* ``pte-scan`` -- periodic Accessed-bit scanning; sees at most one access
  per page per scan window and needs a two-window hysteresis, so it trades
  time resolution for coverage.
* ``hint-fault`` -- poisons a small sample of slow pages; the next touch
  of a poisoned page faults (and unpoisons it), and pages collecting
  enough faults across sampling windows report.
* ``pmu`` -- samples every k-th slow-tier access and extrapolates counts
  by k.

Each backend charges a per-epoch profiling cost in CPU cycles modeling
where its overhead actually comes from (scan sweeps, fault traps, sample
interrupts, or readouts).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import AccessEvent, ConfigError
from .sketch import SketchDetector


class ProfilerKind(enum.Enum):
    NEOPROF = "neoprof"
    PTE_SCAN = "pte-scan"
    HINT_FAULT = "hint-fault"
    PMU_SAMPLE = "pmu"

    @classmethod
    def from_name(cls, name: str) -> "ProfilerKind":
        for kind in cls:
            if kind.value == name:
                return kind
        raise ConfigError(f"unknown profiler {name!r}; try one of "
                          f"{[k.value for k in cls]}")


@dataclass
class HotReport:
    """Promotion candidates for one epoch plus the CPU cycles the backend
    spent producing them.  Pages are unique within a report."""

    pages: np.ndarray
    epoch: int
    profiling_cost_cycles: int


@dataclass
class ProfilingCostModel:
    """Cycle charges per backend mechanism (defaults are order-of-magnitude
    stand-ins, configurable)."""

    pte_scan_cycles_per_pte: int = 50
    pte_scan_fixed_cycles: int = 10000
    hint_fault_cycles_per_fault: int = 2000
    pmu_cycles_per_interrupt: int = 500
    pmu_samples_per_interrupt: int = 64
    neoprof_cycles_per_hot_page: int = 200
    neoprof_readout_fixed_cycles: int = 1000


class NeoprofProfiler:
    """Delegates to the sketch detector; θ applies at observe time."""

    kind = ProfilerKind.NEOPROF

    def __init__(self, detector: SketchDetector, costs: ProfilingCostModel | None = None,
                 threshold: int = 1):
        self.detector = detector
        self.costs = costs or ProfilingCostModel()
        self.threshold = threshold

    def observe(self, event: AccessEvent, in_slow_tier: bool) -> None:
        if in_slow_tier:
            self.detector.observe(event.page, self.threshold)

    def observe_batch(self, cycles: np.ndarray, pages: np.ndarray, slow_mask: np.ndarray) -> None:
        self.detector.observe_batch(pages[slow_mask], self.threshold)

    def collect(self, now: int, theta: int, epoch: int,
                slow_resident: np.ndarray | None = None) -> HotReport:
        pages = np.asarray(self.detector.drain_hot_pages(), dtype=np.int64)
        cost = (self.costs.neoprof_readout_fixed_cycles
                + self.costs.neoprof_cycles_per_hot_page * pages.size)
        return HotReport(pages=pages, epoch=epoch, profiling_cost_cycles=cost)

    def clear(self) -> None:
        self.detector.reset()


class PteScanProfiler:
    """Accessed-bit scanning with TPP-style two-window hysteresis.

    Between scans only a boolean touch per page survives.  At each scan
    boundary touched pages gain one epoch count, untouched pages age by
    one, and slow-resident pages with ``promote_epochs`` counts report
    (counts clear on report).  Cost is linear in scanned PTEs, i.e. the
    slow-tier resident population.
    """

    kind = ProfilerKind.PTE_SCAN
    _COUNT_CAP = 255

    def __init__(self, n_pages: int, scan_interval: int, promote_epochs: int = 2,
                 costs: ProfilingCostModel | None = None):
        if scan_interval <= 0:
            raise ConfigError("scan_interval must be positive cycles")
        if promote_epochs < 1:
            raise ConfigError("promote_epochs must be >= 1")
        self.scan_interval = scan_interval
        self.promote_epochs = promote_epochs
        self.costs = costs or ProfilingCostModel()
        self.accessed = np.zeros(n_pages, dtype=bool)
        self.counts = np.zeros(n_pages, dtype=np.int16)
        self.last_scan = 0

    def observe(self, event: AccessEvent, in_slow_tier: bool) -> None:
        if in_slow_tier:
            self.accessed[event.page] = True

    def observe_batch(self, cycles: np.ndarray, pages: np.ndarray, slow_mask: np.ndarray) -> None:
        self.accessed[pages[slow_mask]] = True

    def collect(self, now: int, theta: int, epoch: int,
                slow_resident: np.ndarray | None = None) -> HotReport:
        if now - self.last_scan < self.scan_interval:
            return HotReport(np.empty(0, dtype=np.int64), epoch, 0)
        self.last_scan = now
        np.minimum(self.counts + self.accessed, self._COUNT_CAP, out=self.counts,
                   casting="unsafe")
        self.counts[~self.accessed & (self.counts > 0)] -= 1
        hot = self.counts >= self.promote_epochs
        if slow_resident is not None:
            hot &= slow_resident
            scanned = int(slow_resident.sum())
        else:
            scanned = self.accessed.size
        pages = np.flatnonzero(hot).astype(np.int64)
        self.counts[pages] = 0
        self.accessed[:] = False
        cost = self.costs.pte_scan_fixed_cycles + self.costs.pte_scan_cycles_per_pte * scanned
        return HotReport(pages=pages, epoch=epoch, profiling_cost_cycles=cost)

    def clear(self) -> None:
        pass


class HintFaultProfiler:
    """Fault-on-sampled-pages profiling.

    A uniform ``sample_fraction`` of slow-resident pages is poisoned each
    resample window; the first touch of a poisoned page takes a fault
    (cost per fault) and unpoisons it.  Pages reaching ``hot_faults``
    faults across windows report; counts clear on report.
    """

    kind = ProfilerKind.HINT_FAULT

    def __init__(self, n_pages: int, resample_interval: int, sample_fraction: float = 0.01,
                 hot_faults: int = 2, rng: np.random.Generator | None = None,
                 costs: ProfilingCostModel | None = None):
        if resample_interval <= 0:
            raise ConfigError("resample_interval must be positive cycles")
        if not 0.0 < sample_fraction <= 1.0:
            raise ConfigError("sample_fraction must be in (0, 1]")
        if hot_faults < 1:
            raise ConfigError("hot_faults must be >= 1")
        self.resample_interval = resample_interval
        self.sample_fraction = sample_fraction
        self.hot_faults = hot_faults
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.costs = costs or ProfilingCostModel()
        self.poisoned = np.zeros(n_pages, dtype=bool)
        self.fault_counts = np.zeros(n_pages, dtype=np.int16)
        self.faults_this_epoch = 0
        self.last_resample = 0
        self._resampled_once = False

    def observe(self, event: AccessEvent, in_slow_tier: bool) -> None:
        if in_slow_tier and self.poisoned[event.page]:
            self.poisoned[event.page] = False
            self.fault_counts[event.page] += 1
            self.faults_this_epoch += 1

    def observe_batch(self, cycles: np.ndarray, pages: np.ndarray, slow_mask: np.ndarray) -> None:
        sp = pages[slow_mask]
        # only the first touch of a poisoned page faults, so the batch
        # fault set is exactly the poisoned pages touched at least once
        faulted = np.unique(sp[self.poisoned[sp]])
        self.poisoned[faulted] = False
        self.fault_counts[faulted] += 1
        self.faults_this_epoch += int(faulted.size)

    def collect(self, now: int, theta: int, epoch: int,
                slow_resident: np.ndarray | None = None) -> HotReport:
        hot = self.fault_counts >= self.hot_faults
        if slow_resident is not None:
            hot &= slow_resident
        pages = np.flatnonzero(hot).astype(np.int64)
        self.fault_counts[pages] = 0
        cost = self.costs.hint_fault_cycles_per_fault * self.faults_this_epoch
        self.faults_this_epoch = 0
        if not self._resampled_once or now - self.last_resample >= self.resample_interval:
            self._resampled_once = True
            self.last_resample = now
            draw = self.rng.random(self.poisoned.size) < self.sample_fraction
            if slow_resident is not None:
                draw &= slow_resident
            self.poisoned = draw
        return HotReport(pages=pages, epoch=epoch, profiling_cost_cycles=cost)

    def clear(self) -> None:
        pass


class PmuSampleProfiler:
    """Every-k-th-access sampling with count extrapolation.

    Slow-tier accesses are counted globally; every k-th one lands a sample
    on its page.  A slow-resident page whose sampled count times k reaches
    θ reports (count clears on report).  Cost accrues per sample-buffer
    interrupt (one per ``pmu_samples_per_interrupt`` samples).
    """

    kind = ProfilerKind.PMU_SAMPLE

    def __init__(self, n_pages: int, sampling_rate: int = 200,
                 costs: ProfilingCostModel | None = None):
        if sampling_rate < 1:
            raise ConfigError("sampling_rate must be >= 1")
        self.sampling_rate = sampling_rate
        self.costs = costs or ProfilingCostModel()
        self.counts = np.zeros(n_pages, dtype=np.int64)
        self.total_slow_accesses = 0
        self.total_samples = 0
        self._interrupts_charged = 0

    def observe(self, event: AccessEvent, in_slow_tier: bool) -> None:
        if not in_slow_tier:
            return
        self.total_slow_accesses += 1
        if self.total_slow_accesses % self.sampling_rate == 0:
            self.counts[event.page] += 1
            self.total_samples += 1

    def observe_batch(self, cycles: np.ndarray, pages: np.ndarray, slow_mask: np.ndarray) -> None:
        sp = pages[slow_mask]
        n = sp.size
        if n == 0:
            return
        k = self.sampling_rate
        first = (k - 1 - self.total_slow_accesses % k) % k
        picks = sp[first::k]
        np.add.at(self.counts, picks, 1)
        self.total_slow_accesses += n
        self.total_samples += int(picks.size)

    def collect(self, now: int, theta: int, epoch: int,
                slow_resident: np.ndarray | None = None) -> HotReport:
        hot = (self.counts > 0) & (self.counts * self.sampling_rate >= theta)
        if slow_resident is not None:
            hot &= slow_resident
        pages = np.flatnonzero(hot).astype(np.int64)
        self.counts[pages] = 0
        per = self.costs.pmu_samples_per_interrupt
        interrupts = self.total_samples // per - self._interrupts_charged
        self._interrupts_charged += interrupts
        cost = self.costs.pmu_cycles_per_interrupt * interrupts
        return HotReport(pages=pages, epoch=epoch, profiling_cost_cycles=cost)

    def clear(self) -> None:
        pass


Profiler = NeoprofProfiler | PteScanProfiler | HintFaultProfiler | PmuSampleProfiler


def profiler_observe(profiler: Profiler, event: AccessEvent, in_slow_tier: bool) -> None:
    profiler.observe(event, in_slow_tier)


def profiler_collect(profiler: Profiler, now: int, theta: int, epoch: int = 0,
                     slow_resident: np.ndarray | None = None) -> HotReport:
    return profiler.collect(now, theta, epoch, slow_resident)
