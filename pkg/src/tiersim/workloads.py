"""Synthetic trace generators.

Two shapes cover the experiments: GUPS-style random updates with a
configurable hot region (optionally relocating mid-trace), and Zipfian
accesses over a permuted page ordering (optionally re-permuted at phase
shifts).  Logical time advances one cycle per event; generators are pure
functions of (spec, rng).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import EVENT_DTYPE, ConfigError, Op


@dataclass
class GupsSpec:
    """Hot-region GUPS: each access lands uniformly in the hot region with
    probability ``hot_access_prob``, else uniformly over all pages.  With
    ``shift_at`` set, the hot region [0, hot) relocates to the adjacent
    disjoint block [hot, 2*hot) from that cycle on."""

    total_pages: int
    events: int
    hot_fraction: float = 0.1
    hot_access_prob: float = 0.9
    shift_at: int | None = None
    read_fraction: float = 0.7

    def __post_init__(self) -> None:
        if not 1 <= self.total_pages <= 1 << 32:
            raise ConfigError("total_pages must be in [1, 2^32]")
        if self.events < 0:
            raise ConfigError("events must be >= 0")
        if not 0.0 < self.hot_fraction < 1.0:
            raise ConfigError("hot_fraction must be in (0, 1)")
        if not 0.0 <= self.hot_access_prob <= 1.0:
            raise ConfigError("hot_access_prob must be in [0, 1]")
        if not 0.0 <= self.read_fraction <= 1.0:
            raise ConfigError("read_fraction must be in [0, 1]")
        if self.shift_at is not None:
            if self.hot_fraction > 0.5 or 2 * self.hot_pages > self.total_pages:
                raise ConfigError(
                    "hot region cannot relocate to a disjoint block: "
                    "hot_fraction must be <= 0.5"
                )
            if self.shift_at < 0:
                raise ConfigError("shift_at must be >= 0")

    @property
    def hot_pages(self) -> int:
        return max(1, round(self.total_pages * self.hot_fraction))


@dataclass
class ZipfSpec:
    """Zipf(s) ranks mapped through a seeded page permutation.

    ``phase_shifts`` is a list of (cycle, permutation_seed): from each
    given cycle on, ranks map through a fresh permutation drawn from that
    seed, relocating the hot set without changing the skew.
    """

    total_pages: int
    events: int
    s: float = 1.2
    phase_shifts: list[tuple[int, int]] = field(default_factory=list)
    read_fraction: float = 0.7

    def __post_init__(self) -> None:
        if not 1 <= self.total_pages <= 1 << 32:
            raise ConfigError("total_pages must be in [1, 2^32]")
        if self.events < 0:
            raise ConfigError("events must be >= 0")
        if self.s <= 0:
            raise ConfigError("zipf exponent s must be > 0")
        if not 0.0 <= self.read_fraction <= 1.0:
            raise ConfigError("read_fraction must be in [0, 1]")
        for cycle, _seed in self.phase_shifts:
            if cycle < 0:
                raise ConfigError("phase shift cycles must be >= 0")


def _make_trace(cycles: np.ndarray, pages: np.ndarray, is_read: np.ndarray) -> np.ndarray:
    out = np.zeros(cycles.size, dtype=EVENT_DTYPE)
    out["cycle"] = cycles
    out["page"] = pages
    out["op"] = np.where(is_read, Op.READ, Op.WRITE)
    return out


def gen_gups(spec: GupsSpec, rng: np.random.Generator) -> np.ndarray:
    """Generate a GUPS trace (draw order: hot?, hot offset, uniform page,
    read? -- fixed so identical rng state gives identical traces)."""
    n = spec.events
    cycles = np.arange(n, dtype=np.uint64)
    is_hot = rng.random(n) < spec.hot_access_prob
    hot_draw = rng.integers(0, spec.hot_pages, n)
    uni_draw = rng.integers(0, spec.total_pages, n)
    is_read = rng.random(n) < spec.read_fraction
    if spec.shift_at is not None:
        hot_base = np.where(cycles >= spec.shift_at, spec.hot_pages, 0)
    else:
        hot_base = np.zeros(n, dtype=np.int64)
    pages = np.where(is_hot, hot_base + hot_draw, uni_draw)
    return _make_trace(cycles, pages, is_read)


def gen_zipf(spec: ZipfSpec, rng: np.random.Generator) -> np.ndarray:
    """Generate a Zipf trace via inverse-CDF over the exact rank table
    (draw order: rank uniforms, base permutation, read?)."""
    n = spec.events
    cycles = np.arange(n, dtype=np.uint64)
    weights = np.arange(1, spec.total_pages + 1, dtype=np.float64) ** -spec.s
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    u = rng.random(n)
    ranks = np.searchsorted(cdf, u, side="right")
    perm = rng.permutation(spec.total_pages)
    is_read = rng.random(n) < spec.read_fraction
    pages = np.empty(n, dtype=np.int64)
    shifts = sorted(spec.phase_shifts)
    starts = [0] + [cycle for cycle, _ in shifts]
    perms = [perm] + [
        np.random.default_rng(seed).permutation(spec.total_pages) for _, seed in shifts
    ]
    bounds = starts[1:] + [n]
    # cycles are 0..n-1, so a cycle value is its own index (clamped)
    for start, end, p in zip(starts, bounds, perms):
        lo, hi = min(int(start), n), min(int(end), n)
        pages[lo:hi] = p[ranks[lo:hi]]
    return _make_trace(cycles, pages, is_read)
