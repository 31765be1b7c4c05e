"""Hotness-threshold policies.

The dynamic policy re-derives the promotion threshold every update period
from a histogram of sketch counters: it aims the threshold at the
(1 - p)-quantile, and steers the percentile p with three feedback signals
-- slow-tier bandwidth utilization B pushes p up (migrate more when the
slow tier is saturated), the ping-pong ratio P pushes p down (migration
is thrashing), and exceeding the migration quota or dipping below the
sketch's error bound halves p (be pickier).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ConfigError
from .sketch import Histogram


@dataclass
class PolicyParams:
    """Feedback knobs for dynamic threshold adjustment.

    Percentiles are fractions (0.0001 is 0.01%).  ``m_quota_pages_per_s``
    is the migration-engine budget the adjustment respects;
    ``update_interval_ms`` is the period between threshold updates in
    simulated milliseconds (by default every migration interval).
    """

    p_min: float = 0.0001
    p_max: float = 0.0156
    p_init: float = 0.001
    alpha: float = 1.0
    beta: float = 2.0
    m_quota_pages_per_s: float = 65536.0
    update_interval_ms: float = 10.0

    def __post_init__(self) -> None:
        if not 0.0 < self.p_min <= self.p_init <= self.p_max < 1.0:
            raise ConfigError("need 0 < p_min <= p_init <= p_max < 1")
        if self.alpha < 0 or self.beta < 0:
            raise ConfigError("alpha and beta must be nonnegative")
        if self.m_quota_pages_per_s <= 0:
            raise ConfigError("m_quota_pages_per_s must be positive")
        if self.update_interval_ms <= 0:
            raise ConfigError("update_interval_ms must be positive")

    @property
    def quota_per_period(self) -> int:
        """Pages the migration engine may move per update period."""
        return math.ceil(self.m_quota_pages_per_s * self.update_interval_ms / 1000.0)


@dataclass
class PolicyState:
    """Current percentile/threshold plus the previous period's inputs."""

    p: float
    theta: int = 1
    last_bandwidth: float = 0.0
    last_pingpong: float = 0.0
    last_error_bound: int = 0
    last_migrated: int = 0


def quantile(hist: Histogram, x: float) -> int:
    """Q_F(x): smallest bin upper edge y such that at least fraction x of
    entries hold values below y.  Within one bin width of the exact
    percentile of the underlying counters."""
    if not 0.0 <= x <= 1.0:
        raise ConfigError("quantile point must be in [0, 1]")
    total = hist.total
    if total <= 0:
        raise ConfigError("quantile of an empty histogram")
    cum = np.cumsum(hist.counts)
    b = int(np.searchsorted(cum, x * total, side="left"))
    b = min(b, hist.bins - 1)
    return hist.upper_edge(b)


def update_threshold(
    state: PolicyState,
    hist: Histogram,
    bandwidth: float,
    pingpong_ratio: float,
    err_bound: int,
    migrated: int,
    params: PolicyParams,
) -> int:
    """One dynamic-threshold update from the just-ended period's stats.

    ``migrated`` is the page count actually moved last period; staying
    under the period quota lets p respond to bandwidth/ping-pong feedback,
    exceeding it halves p.  A threshold below the sketch error bound
    ``err_bound`` would promote on noise, so p is halved (once -- no loop)
    when that happens.  Returns the new threshold, floored at 1.
    """
    if migrated < params.quota_per_period:
        p = state.p * (1.0 + bandwidth) ** params.alpha / (1.0 + pingpong_ratio) ** params.beta
        p = min(max(p, params.p_min), params.p_max)
    else:
        p = max(params.p_min, state.p / 2.0)
    if quantile(hist, 1.0 - p) < err_bound:
        p = max(params.p_min, p / 2.0)
    theta = max(1, quantile(hist, 1.0 - p))
    state.p = p
    state.theta = theta
    state.last_bandwidth = bandwidth
    state.last_pingpong = pingpong_ratio
    state.last_error_bound = err_bound
    state.last_migrated = migrated
    return theta


class DynamicThresholdPolicy:
    """Stateful wrapper used by the experiment harness."""

    kind = "dynamic"

    def __init__(self, params: PolicyParams):
        self.params = params
        self.state = PolicyState(p=params.p_init)

    @property
    def p(self) -> float:
        return self.state.p

    @property
    def theta(self) -> int:
        return self.state.theta

    def update(
        self,
        hist: Histogram | None,
        bandwidth: float,
        pingpong_ratio: float,
        err_bound: int,
        migrated: int,
    ) -> int:
        if hist is None:
            raise ConfigError("dynamic threshold policy needs a counter histogram")
        return update_threshold(
            self.state, hist, bandwidth, pingpong_ratio, err_bound, migrated, self.params
        )


class FixedThresholdPolicy:
    """Constant-threshold baseline; updates are the identity."""

    kind = "fixed"
    p = 0.0

    def __init__(self, theta: int):
        if theta < 1:
            raise ConfigError("fixed threshold must be >= 1")
        self.theta = int(theta)

    def update(self, hist, bandwidth, pingpong_ratio, err_bound, migrated) -> int:
        return self.theta


def fixed_threshold_policy(theta: int) -> FixedThresholdPolicy:
    return FixedThresholdPolicy(theta)
