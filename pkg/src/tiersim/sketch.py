"""Count-min sketch hot-page detector.

The detector keeps ``depth`` lanes of ``width`` counters.  Every observed
page hashes to one entry per lane (H3 hashing, one seed matrix per lane);
the entry counters are incremented with saturation and the page's
estimated access count is the minimum over its lanes.  The estimate is
one-sided: it never undercounts (until a counter saturates), and it
overcounts page P by at most eps*N with probability at least 1-delta for
eps = 2/width, delta = 2^-depth.

Pages whose estimate crosses a threshold are appended to a bounded hot
buffer exactly once per reset generation: reporting a page sets a hot bit
in each of its entries, and a page whose entries are all hot is assumed
already reported.  ``reset`` is O(1) -- it bumps a generation counter and
entries reinitialize lazily on first touch.

Each entry therefore carries three fields (see :class:`SketchEntry`):
a saturating counter, a validity tag (the lazy-reset generation), and the
hot bit used by the duplicate-suppression filter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core import ConfigError, make_rng


def _is_pow2(x: int) -> bool:
    return x > 0 and (x & (x - 1)) == 0


@dataclass
class SketchParams:
    """Sketch geometry and error knobs.

    ``width`` must be a power of two (the H3 hash produces log2(width)-bit
    indices).  ``epsilon``/``delta`` may be given for record-keeping or via
    :meth:`from_error_bounds`; when unset they are implied by the geometry.
    ``threshold_ceiling`` is the largest hotness threshold the histogram
    must resolve: bins 0..hist_bins-2 uniformly cover
    [0, 4*threshold_ceiling) and the last bin catches everything above.
    """

    width: int = 512 * 1024
    depth: int = 2
    counter_bits: int = 16
    hot_buffer_capacity: int = 16384
    hist_bins: int = 64
    threshold_ceiling: int = 4096
    epsilon: float | None = None
    delta: float | None = None

    def __post_init__(self) -> None:
        if not _is_pow2(self.width) or self.width < 2:
            raise ConfigError("sketch width must be a power of two >= 2")
        if self.depth < 1:
            raise ConfigError("sketch depth must be >= 1")
        if not 1 <= self.counter_bits <= 32:
            raise ConfigError("counter_bits must be in [1, 32]")
        if self.hot_buffer_capacity < 1:
            raise ConfigError("hot_buffer_capacity must be >= 1")
        if self.hist_bins < 2:
            raise ConfigError("hist_bins must be >= 2")
        if self.threshold_ceiling < 1:
            raise ConfigError("threshold_ceiling must be >= 1")
        if self.epsilon is not None and not 0.0 < self.epsilon <= 1.0:
            raise ConfigError("epsilon must be in (0, 1]")
        if self.delta is not None and not 0.0 < self.delta < 1.0:
            raise ConfigError("delta must be in (0, 1)")

    @classmethod
    def from_error_bounds(cls, epsilon: float, delta: float, **kwargs) -> "SketchParams":
        """Smallest geometry meeting the requested error bounds:
        width = ceil(2/epsilon) rounded up to a power of two,
        depth = ceil(log2(1/delta))."""
        if not 0.0 < epsilon <= 1.0 or not 0.0 < delta < 1.0:
            raise ConfigError("need 0 < epsilon <= 1 and 0 < delta < 1")
        width = 1 << max(1, math.ceil(math.log2(math.ceil(2.0 / epsilon))))
        depth = max(1, math.ceil(math.log2(1.0 / delta)))
        return cls(width=width, depth=depth, epsilon=epsilon, delta=delta, **kwargs)

    @property
    def implied_epsilon(self) -> float:
        return self.epsilon if self.epsilon is not None else 2.0 / self.width

    @property
    def implied_delta(self) -> float:
        return self.delta if self.delta is not None else 2.0 ** -self.depth

    @property
    def counter_cap(self) -> int:
        return (1 << self.counter_bits) - 1

    @property
    def hist_bin_width(self) -> int:
        return max(1, math.ceil(4 * self.threshold_ceiling / (self.hist_bins - 1)))


class SketchEntry(NamedTuple):
    """One (lane, index) cell, materialized for inspection."""

    counter: int
    valid: bool
    hot: bool


@dataclass
class Histogram:
    """Distribution of lane-0 counter values, one sample per entry.

    Bins 0..len-2 have uniform integer ``bin_width``; the last bin is the
    overflow bin reaching the counter cap.  Invalid (lazily reset) entries
    count as zero, so ``counts.sum()`` always equals the sketch width.
    """

    counts: np.ndarray
    bin_width: int
    counter_cap: int

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def bins(self) -> int:
        return len(self.counts)

    def lower_edge(self, b: int) -> int:
        return b * self.bin_width

    def upper_edge(self, b: int) -> int:
        """Exclusive upper edge; the overflow bin ends past the cap."""
        if b == self.bins - 1:
            return max(self.counter_cap + 1, self.bins * self.bin_width)
        return (b + 1) * self.bin_width


class H3HashFamily:
    """H3 universal hashing: h(x) = XOR of seed rows at x's set bits.

    One ``page_bits x 1`` matrix of log2(width)-bit rows per lane, rows
    pairwise distinct across lanes.  Evaluation tabulates the XOR byte by
    byte (four 256-entry tables per lane), which is equivalent to the
    bit-by-bit definition because XOR is associative over bit groups.
    """

    def __init__(self, width: int, lanes: int, page_bits: int = 32, seed: int = 0):
        if not _is_pow2(width):
            raise ConfigError("H3 width must be a power of two")
        if not 1 <= page_bits <= 32:
            raise ConfigError("page_bits must be in [1, 32]")
        self.width = width
        self.lanes = lanes
        self.page_bits = page_bits
        rng = make_rng(seed, "h3")
        rows = rng.integers(0, width, size=(lanes, page_bits), dtype=np.uint32)
        # Degenerate geometries (tiny width) can draw identical lane
        # matrices; redraw until pairwise distinct so lanes stay
        # independent hash functions.
        for lane in range(1, lanes):
            while any(np.array_equal(rows[lane], rows[k]) for k in range(lane)):
                rows[lane] = rng.integers(0, width, size=page_bits, dtype=np.uint32)
        self.rows = rows
        self._tables = self._tabulate(rows, page_bits)

    @staticmethod
    def _tabulate(rows: np.ndarray, page_bits: int) -> np.ndarray:
        lanes = rows.shape[0]
        tables = np.zeros((lanes, 4, 256), dtype=np.uint32)
        vals = np.arange(256, dtype=np.uint32)
        for b in range(4):
            for j in range(8):
                bit = b * 8 + j
                if bit >= page_bits:
                    break
                mask = ((vals >> j) & 1).astype(bool)
                for lane in range(lanes):
                    tables[lane, b, mask] ^= rows[lane, bit]
        return tables

    def index(self, page: int, lane: int) -> int:
        if not 0 <= page < (1 << self.page_bits):
            raise ConfigError(f"page {page} outside {self.page_bits}-bit space")
        t = self._tables[lane]
        return int(
            t[0, page & 0xFF]
            ^ t[1, (page >> 8) & 0xFF]
            ^ t[2, (page >> 16) & 0xFF]
            ^ t[3, (page >> 24) & 0xFF]
        )

    def index_batch(self, pages: np.ndarray, lane: int) -> np.ndarray:
        p = np.asarray(pages, dtype=np.int64)
        t = self._tables[lane]
        out = (
            t[0, p & 0xFF]
            ^ t[1, (p >> 8) & 0xFF]
            ^ t[2, (p >> 16) & 0xFF]
            ^ t[3, (p >> 24) & 0xFF]
        )
        return out.astype(np.int64)


def h3_index(family: H3HashFamily, page: int, lane: int) -> int:
    return family.index(page, lane)


class SketchDetector:
    """Counting sketch plus hot-page filter and bounded report buffer."""

    def __init__(self, params: SketchParams, page_bits: int = 32, seed: int = 0):
        self.params = params
        self.hash = H3HashFamily(params.width, params.depth, page_bits, seed)
        shape = (params.depth, params.width)
        self.counters = np.zeros(shape, dtype=np.uint32)
        self.hot = np.zeros(shape, dtype=bool)
        # Entry is valid iff its tag equals the current generation; reset
        # bumps the generation instead of touching W*depth cells.
        self._gen_tags = np.zeros(shape, dtype=np.uint32)
        self._generation = 1
        self.hot_buffer: list[int] = []
        self.overflow_count = 0
        self.total_seen = 0

    # -- introspection ------------------------------------------------

    def entry(self, lane: int, index: int) -> SketchEntry:
        valid = bool(self._gen_tags[lane, index] == self._generation)
        return SketchEntry(
            counter=int(self.counters[lane, index]) if valid else 0,
            valid=valid,
            hot=bool(self.hot[lane, index]) if valid else False,
        )

    # -- core operations ----------------------------------------------

    def observe(self, page: int, threshold: int) -> int | None:
        """Count one access; returns the page if it newly crossed
        ``threshold`` (post-increment estimate strictly above it) and was
        not suppressed by the hot-bit filter, else None."""
        cap = self.params.counter_cap
        gen = self._generation
        est = cap + 1
        idxs = []
        for lane in range(self.params.depth):
            i = self.hash.index(page, lane)
            idxs.append(i)
            if self._gen_tags[lane, i] != gen:
                self.counters[lane, i] = 0
                self.hot[lane, i] = False
                self._gen_tags[lane, i] = gen
            post = min(int(self.counters[lane, i]) + 1, cap)
            self.counters[lane, i] = post
            est = min(est, post)
        self.total_seen += 1
        if est <= threshold:
            return None
        if all(self.hot[lane, i] for lane, i in enumerate(idxs)):
            return None
        for lane, i in enumerate(idxs):
            self.hot[lane, i] = True
        if len(self.hot_buffer) < self.params.hot_buffer_capacity:
            self.hot_buffer.append(int(page))
        else:
            self.overflow_count += 1
        return int(page)

    def observe_batch(self, pages: np.ndarray, threshold: int) -> np.ndarray:
        """Vectorized :meth:`observe` over a chunk of a cycle-ordered
        stream; exactly equivalent to calling observe() per event.

        Returns the newly reported pages in stream order.  Only a page's
        first threshold crossing inside the chunk can report (its own
        report hot-marks all of its entries), so the filter loop only
        visits one position per distinct crossing page.
        """
        pages = np.ascontiguousarray(pages, dtype=np.int64)
        n = pages.size
        if n == 0:
            return np.empty(0, dtype=np.int64)
        cap = self.params.counter_cap
        gen = self._generation
        depth = self.params.depth
        post_min = np.full(n, np.iinfo(np.int64).max)
        idx_by_lane = []
        for lane in range(depth):
            idx = self.hash.index_batch(pages, lane)
            idx_by_lane.append(idx)
            order = np.argsort(idx, kind="stable")
            sidx = idx[order]
            starts = np.flatnonzero(np.r_[True, sidx[1:] != sidx[:-1]])
            lens = np.diff(np.r_[starts, n])
            # occurrence rank of each event within its entry's group ->
            # the post-increment counter it would see sequentially
            rank = np.empty(n, dtype=np.int64)
            rank[order] = np.arange(n, dtype=np.int64) - np.repeat(starts, lens)
            stale = self._gen_tags[lane, idx] != gen
            base = np.where(stale, 0, self.counters[lane, idx].astype(np.int64))
            post_min = np.minimum(post_min, np.minimum(base + rank + 1, cap))
            uniq = sidx[starts]
            stale_u = self._gen_tags[lane, uniq] != gen
            ubase = np.where(stale_u, 0, self.counters[lane, uniq].astype(np.int64))
            self.counters[lane, uniq] = np.minimum(ubase + lens, cap).astype(np.uint32)
            self.hot[lane, uniq[stale_u]] = False
            self._gen_tags[lane, uniq] = gen
        self.total_seen += n
        reported: list[int] = []
        crossed = np.flatnonzero(post_min > threshold)
        if crossed.size:
            _, first = np.unique(pages[crossed], return_index=True)
            for pos in crossed[np.sort(first)]:
                page = int(pages[pos])
                entries = [(lane, int(idx_by_lane[lane][pos])) for lane in range(depth)]
                if all(self.hot[lane, i] for lane, i in entries):
                    continue
                for lane, i in entries:
                    self.hot[lane, i] = True
                if len(self.hot_buffer) < self.params.hot_buffer_capacity:
                    self.hot_buffer.append(page)
                else:
                    self.overflow_count += 1
                reported.append(page)
        return np.asarray(reported, dtype=np.int64)

    def estimate(self, page: int) -> int:
        gen = self._generation
        est = None
        for lane in range(self.params.depth):
            i = self.hash.index(page, lane)
            v = int(self.counters[lane, i]) if self._gen_tags[lane, i] == gen else 0
            est = v if est is None else min(est, v)
        return est

    def estimate_batch(self, pages: np.ndarray) -> np.ndarray:
        pages = np.asarray(pages, dtype=np.int64)
        est = None
        for lane in range(self.params.depth):
            idx = self.hash.index_batch(pages, lane)
            v = np.where(
                self._gen_tags[lane, idx] == self._generation,
                self.counters[lane, idx].astype(np.int64),
                0,
            )
            est = v if est is None else np.minimum(est, v)
        return est

    def reset(self) -> None:
        """O(1) logical clear of counters, validity, hot bits, buffer and
        stream statistics."""
        self._generation += 1
        if self._generation >= np.iinfo(np.uint32).max:
            self._gen_tags.fill(0)
            self._generation = 1
        self.hot_buffer = []
        self.overflow_count = 0
        self.total_seen = 0

    def drain_hot_pages(self) -> list[int]:
        """Hand off and empty the hot buffer.  Hot bits stay set, so a
        drained page is not re-reported until the next reset."""
        out = self.hot_buffer
        self.hot_buffer = []
        return out

    def compute_histogram(self) -> Histogram:
        p = self.params
        values = np.where(
            self._gen_tags[0] == self._generation, self.counters[0], 0
        ).astype(np.int64)
        bins = np.minimum(values // p.hist_bin_width, p.hist_bins - 1)
        counts = np.bincount(bins, minlength=p.hist_bins).astype(np.int64)
        return Histogram(counts=counts, bin_width=p.hist_bin_width, counter_cap=p.counter_cap)

    def error_bound(self) -> int:
        return error_bound(self.compute_histogram(), self.params)

    def dump_state(self) -> str:
        """Human-readable diagnostic dump of the detector state."""
        hist = self.compute_histogram()
        lines = [
            f"sketch width={self.params.width} depth={self.params.depth} "
            f"counter_bits={self.params.counter_bits}",
            f"total_seen={self.total_seen}",
            f"overflow_count={self.overflow_count}",
            f"hot_buffer={len(self.hot_buffer)}/{self.params.hot_buffer_capacity}",
            f"error_bound={error_bound(hist, self.params)}",
            "lane-0 histogram (nonzero bins):",
        ]
        for b in np.flatnonzero(hist.counts):
            lines.append(
                f"  [{hist.lower_edge(int(b))}, {hist.upper_edge(int(b))}): "
                f"{int(hist.counts[b])}"
            )
        return "\n".join(lines)


def error_bound(hist: Histogram, params: SketchParams) -> int:
    """Overcount bound e from a counter histogram.

    e is the value at descending rank ceil(W * delta^(1/depth)) of the
    lane-0 counters, approximated from below by the lower edge of the
    histogram bin containing that order statistic.  With depth=2 and
    delta=0.25 the rank is W/2, i.e. the distribution's median.
    """
    total = hist.total
    if total <= 0:
        raise ConfigError("error_bound needs a nonempty histogram")
    rank = math.ceil(total * params.implied_delta ** (1.0 / params.depth))
    rank = min(max(rank, 1), total)
    # descending rank r (1-based) is ascending 0-based index total - r
    target = total - rank + 1  # entries at or below the order statistic
    cum = np.cumsum(hist.counts)
    b = int(np.searchsorted(cum, target, side="left"))
    return hist.lower_edge(b)
