"""Device-side traffic monitor.

Models the far-memory device's transaction counters: each access occupies
the device for a fixed number of transfer cycles, and sampling the monitor
yields the window's bandwidth utilization plus its read share, then starts
a new window.
"""

from __future__ import annotations

from .core import AccessEvent, Op


class StateMonitor:
    """Accumulates read/write transfer cycles over a sampling window."""

    def __init__(self, transfer_cycles_per_access: int = 4, window_start: int = 0):
        self.transfer_cycles_per_access = transfer_cycles_per_access
        self.window_start = window_start
        self.read_cycles = 0
        self.write_cycles = 0
        # cycles elapsed between window start and the latest recorded event
        self.total_cycles = 0

    def record(self, event: AccessEvent) -> None:
        if event.op == Op.READ:
            self.read_cycles += self.transfer_cycles_per_access
        else:
            self.write_cycles += self.transfer_cycles_per_access
        self.total_cycles = max(self.total_cycles, event.cycle - self.window_start)

    def record_batch(self, n_reads: int, n_writes: int, last_cycle: int | None = None) -> None:
        """Bulk-record a window's worth of accesses (order irrelevant:
        only the counts and the latest cycle matter)."""
        self.read_cycles += n_reads * self.transfer_cycles_per_access
        self.write_cycles += n_writes * self.transfer_cycles_per_access
        if last_cycle is not None:
            self.total_cycles = max(self.total_cycles, last_cycle - self.window_start)

    def sample_and_reset(self, now: int) -> tuple[float, float]:
        """Close the window at ``now`` and open a new one.

        Returns ``(bandwidth_utilization, read_fraction)``: utilization is
        busy transfer cycles over window cycles clamped to [0, 1] (0 for an
        empty window); read fraction defaults to 0.5 when there was no
        traffic at all.
        """
        window = now - self.window_start
        busy = self.read_cycles + self.write_cycles
        utilization = 0.0 if window <= 0 else min(max(busy / window, 0.0), 1.0)
        read_fraction = 0.5 if busy == 0 else self.read_cycles / busy
        self.window_start = now
        self.read_cycles = 0
        self.write_cycles = 0
        self.total_cycles = 0
        return utilization, read_fraction
