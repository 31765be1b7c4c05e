"""Two-tier page placement, migration, and the latency cost model.

Placement is first-touch NUMA: new pages fill the fast tier until it is
full, then spill to slow.  Fast-tier residents live on a simplified LRU-2Q
structure -- a page enters the inactive list on allocation, moves to the
active list on its second touch (promoted pages enter active directly),
and cold demotion drains the inactive list from its oldest end before
touching the active list.  A per-epoch migration quota bounds promotions
plus demotions together, and a demoted-then-promoted page counts as a
ping-pong event.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import AccessEvent, ConfigError, SimConfig, SimulationError


class Tier(enum.IntEnum):
    NONE = 0
    FAST = 1
    SLOW = 2


class ListKind(enum.IntEnum):
    NONE = 0
    ACTIVE = 1
    INACTIVE = 2


@dataclass
class PageMeta:
    """Materialized per-page metadata (see :meth:`TierState.page_meta`)."""

    tier: Tier
    demoted_flag: bool
    last_touch: int
    list_membership: ListKind


@dataclass
class LatencyModel:
    fast_latency_ns: float = 120.0
    slow_latency_ns: float = 430.0
    migration_cost_ns_per_page: float = 3000.0

    @classmethod
    def from_sim_config(cls, cfg: SimConfig, migration_cost_ns_per_page: float = 3000.0):
        return cls(cfg.fast_latency_ns, cfg.slow_latency_ns, migration_cost_ns_per_page)


@dataclass
class MigrationQuota:
    """Per-epoch migration budget, shared by promotions and demotions."""

    pages_per_second: float = 65536.0
    epoch_budget: int = 0
    consumed_this_epoch: int = 0

    @classmethod
    def for_epoch_length(cls, pages_per_second: float, epoch_seconds: float) -> "MigrationQuota":
        if pages_per_second <= 0 or epoch_seconds <= 0:
            raise ConfigError("quota rate and epoch length must be positive")
        return cls(
            pages_per_second=pages_per_second,
            epoch_budget=math.ceil(pages_per_second * epoch_seconds),
        )

    @property
    def remaining(self) -> int:
        return self.epoch_budget - self.consumed_this_epoch

    def start_epoch(self) -> None:
        self.consumed_this_epoch = 0

    def consume(self, n: int = 1) -> None:
        if self.consumed_this_epoch + n > self.epoch_budget:
            raise SimulationError("migration quota overrun")
        self.consumed_this_epoch += n


@dataclass
class PromotionResult:
    promoted: int = 0
    pingpongs: int = 0
    skipped_quota: int = 0
    skipped_ineligible: int = 0


class TierState:
    """Placement and residency bookkeeping for one simulated machine.

    State is kept in flat per-page arrays (tier, 2Q membership, demotion
    flag, last-touch cycle) so trace epochs can be applied vectorized; the
    per-event :meth:`access` is the reference semantics and the batch path
    is tested equivalent.
    """

    def __init__(self, config: SimConfig, latency: LatencyModel | None = None):
        self.config = config
        self.latency = latency or LatencyModel.from_sim_config(config)
        n = config.total_pages
        self.tier = np.zeros(n, dtype=np.int8)
        self.membership = np.zeros(n, dtype=np.int8)
        self.demoted_flag = np.zeros(n, dtype=bool)
        self.last_touch = np.zeros(n, dtype=np.int64)
        self.fast_used = 0
        self.slow_used = 0
        self.promotion_count = 0
        self.demotion_count = 0
        self.pingpong_count = 0

    # -- capacity -------------------------------------------------------

    @property
    def fast_free(self) -> int:
        return self.config.fast_pages - self.fast_used

    @property
    def slow_free(self) -> int:
        return self.config.slow_pages - self.slow_used

    def page_meta(self, page: int) -> PageMeta:
        return PageMeta(
            tier=Tier(self.tier[page]),
            demoted_flag=bool(self.demoted_flag[page]),
            last_touch=int(self.last_touch[page]),
            list_membership=ListKind(self.membership[page]),
        )

    def take_epoch_counters(self) -> tuple[int, int, int]:
        """(promotions, demotions, pingpongs) since last call, then reset."""
        out = (self.promotion_count, self.demotion_count, self.pingpong_count)
        self.promotion_count = self.demotion_count = self.pingpong_count = 0
        return out

    # -- accesses ---------------------------------------------------------

    def _check_page(self, page: int) -> None:
        if not 0 <= page < self.config.total_pages:
            raise SimulationError(
                f"page {page} outside address space of {self.config.total_pages} pages"
            )

    def access(self, event: AccessEvent) -> float:
        """Apply one access; returns its device latency in ns."""
        page = event.page
        self._check_page(page)
        if self.tier[page] == Tier.NONE:
            if self.fast_free > 0:
                self.tier[page] = Tier.FAST
                self.membership[page] = ListKind.INACTIVE
                self.fast_used += 1
            elif self.slow_free > 0:
                self.tier[page] = Tier.SLOW
                self.slow_used += 1
            else:
                raise SimulationError("address space exhausted: both tiers full")
        elif self.tier[page] == Tier.FAST and self.membership[page] == ListKind.INACTIVE:
            self.membership[page] = ListKind.ACTIVE
        self.last_touch[page] = event.cycle
        if self.tier[page] == Tier.FAST:
            return self.latency.fast_latency_ns
        return self.latency.slow_latency_ns

    def access_batch(self, cycles: np.ndarray, pages: np.ndarray) -> tuple[float, int, int, np.ndarray]:
        """Apply an epoch's accesses (no migrations happen mid-epoch).

        Returns ``(total_latency_ns, fast_accesses, slow_accesses,
        slow_mask)`` where slow_mask flags the slow-tier events.  Exactly
        equivalent to per-event :meth:`access` because placement only
        changes here through first-touch allocation, which happens in
        first-appearance order.
        """
        pages = np.asarray(pages, dtype=np.int64)
        cycles = np.asarray(cycles, dtype=np.int64)
        if pages.size == 0:
            return 0.0, 0, 0, np.zeros(0, dtype=bool)
        if int(pages.min()) < 0 or int(pages.max()) >= self.config.total_pages:
            bad = pages[(pages < 0) | (pages >= self.config.total_pages)][0]
            raise SimulationError(
                f"page {int(bad)} outside address space of {self.config.total_pages} pages"
            )
        uniq, first_idx, counts = np.unique(pages, return_index=True, return_counts=True)
        new = self.tier[uniq] == Tier.NONE
        if np.any(new):
            new_pages = uniq[new]
            order = np.argsort(first_idx[new], kind="stable")
            new_pages = new_pages[order]
            k_fast = min(self.fast_free, new_pages.size)
            fast_alloc = new_pages[:k_fast]
            slow_alloc = new_pages[k_fast:]
            if slow_alloc.size > self.slow_free:
                raise SimulationError("address space exhausted: both tiers full")
            self.tier[fast_alloc] = Tier.FAST
            self.membership[fast_alloc] = ListKind.INACTIVE
            self.fast_used += fast_alloc.size
            self.tier[slow_alloc] = Tier.SLOW
            self.slow_used += slow_alloc.size
        else:
            fast_alloc = np.empty(0, dtype=np.int64)
        # 2Q: previously-resident fast pages activate on any touch; pages
        # allocated this epoch need a second touch.
        fast_uniq = uniq[self.tier[uniq] == Tier.FAST]
        was_new = np.isin(fast_uniq, fast_alloc, assume_unique=True)
        touches = counts[np.searchsorted(uniq, fast_uniq)]
        activate = fast_uniq[(~was_new) | (touches >= 2)]
        self.membership[activate] = ListKind.ACTIVE
        # last occurrence of each unique page, for last_touch
        last_idx = pages.size - 1 - np.unique(pages[::-1], return_index=True)[1]
        self.last_touch[uniq] = cycles[last_idx]
        slow_mask = self.tier[pages] == Tier.SLOW
        n_slow = int(slow_mask.sum())
        n_fast = pages.size - n_slow
        total = n_fast * self.latency.fast_latency_ns + n_slow * self.latency.slow_latency_ns
        return total, n_fast, n_slow, slow_mask

    # -- migration --------------------------------------------------------

    def _cold_order(self) -> np.ndarray:
        """Fast-tier demotion victims: inactive list oldest-first, then
        active list oldest-first (last_touch, page index as tiebreak)."""
        fast = np.flatnonzero(self.tier == Tier.FAST)
        if fast.size == 0:
            return fast
        inactive = self.membership[fast] == ListKind.INACTIVE
        parts = []
        for mask in (inactive, ~inactive):
            cand = fast[mask]
            parts.append(cand[np.lexsort((cand, self.last_touch[cand]))])
        return np.concatenate(parts)

    def _demote(self, page: int) -> None:
        self.tier[page] = Tier.SLOW
        self.membership[page] = ListKind.NONE
        self.demoted_flag[page] = True
        self.fast_used -= 1
        self.slow_used += 1
        self.demotion_count += 1

    def promote(self, pages, quota: MigrationQuota) -> PromotionResult:
        """Move reported hot pages to the fast tier within quota.

        Non-slow-resident entries are skipped (already fast, or never
        touched).  When the fast tier is full, each promotion first demotes
        the coldest fast page, consuming quota for the demotion as well.
        """
        result = PromotionResult()
        victims: list[int] | None = None
        vpos = 0
        promoted_now: set[int] = set()
        for page in np.asarray(pages, dtype=np.int64):
            page = int(page)
            self._check_page(page)
            if self.tier[page] != Tier.SLOW:
                result.skipped_ineligible += 1
                continue
            need = 1 if self.fast_free > 0 else 2
            if quota.remaining < need:
                result.skipped_quota += 1
                continue
            if self.fast_free == 0:
                if victims is None:
                    # snapshot of demotion candidates; pages promoted by
                    # this very call are never victims
                    victims = [int(v) for v in self._cold_order() if int(v) not in promoted_now]
                    vpos = 0
                if vpos >= len(victims) or self.slow_free == 0:
                    # fast tier has no capacity at all, or nowhere to demote
                    result.skipped_quota += 1
                    continue
                self._demote(victims[vpos])
                vpos += 1
                quota.consume(1)
            self.tier[page] = Tier.FAST
            self.membership[page] = ListKind.ACTIVE
            self.fast_used += 1
            self.slow_used -= 1
            self.promotion_count += 1
            quota.consume(1)
            result.promoted += 1
            promoted_now.add(page)
            if self.demoted_flag[page]:
                self.pingpong_count += 1
                result.pingpongs += 1
                self.demoted_flag[page] = False
        return result

    def demote_cold(self, target_free: int, quota: MigrationQuota) -> int:
        """Demote coldest fast pages until fast_free >= target_free or the
        quota runs out; returns the demotion count."""
        if target_free > self.config.fast_pages:
            raise ConfigError("target_free exceeds fast tier capacity")
        if self.fast_free >= target_free:
            return 0
        demoted = 0
        for victim in self._cold_order():
            if self.fast_free >= target_free or quota.remaining < 1 or self.slow_free == 0:
                break
            self._demote(int(victim))
            quota.consume(1)
            demoted += 1
        return demoted
