"""Symmetric supply and demand schedules, assignments and replenishment."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Optional

from .exchange import Side, format_currency, to_ticks


class ScheduleError(ValueError):
    pass


def buyer_ids(n: int) -> list:
    return [f"B{i:02d}" for i in range(n)]


def seller_ids(n: int) -> list:
    return [f"S{i:02d}" for i in range(n)]


@dataclass(frozen=True)
class ScheduleConfig:
    """Market shape. Prices are in ticks.

    Defaults give the standard 10v10 market with limits spread over
    [0.10, 1.90], 330-step sessions and replenishment every 30 steps.
    """

    n: int = 10
    price_low: int = 10
    price_high: int = 190
    replenish_interval: int = 30
    session_length: int = 330

    def __post_init__(self):
        if self.n < 1:
            raise ScheduleError(f"n must be >= 1, got {self.n}")
        if self.price_low > self.price_high:
            raise ScheduleError("price_low must not exceed price_high")
        if self.replenish_interval < 1:
            raise ScheduleError("replenish_interval must be >= 1")
        if self.session_length < self.replenish_interval:
            raise ScheduleError("session_length must be >= replenish_interval")
        if self.n == 1 and self.price_low != self.price_high:
            raise ScheduleError("one trader per side cannot span a non-degenerate interval")


@dataclass(frozen=True)
class Assignment:
    trader_id: str
    side: Side
    limit: int
    issued_step: int = 0


@dataclass(frozen=True)
class EquilibriumInfo:
    p0_low: Optional[int]
    p0_high: Optional[int]
    q0: int

    @property
    def midpoint(self) -> Optional[float]:
        if self.q0 == 0:
            return None
        return (self.p0_low + self.p0_high) / 2

    @property
    def half_width(self) -> Optional[float]:
        if self.q0 == 0:
            return None
        return (self.p0_high - self.p0_low) / 2


def schedule_limits(config: ScheduleConfig) -> list:
    """Evenly spaced limit prices, ascending, rounded half-up to whole ticks."""
    lo, hi, n = config.price_low, config.price_high, config.n
    if n == 1:
        return [lo]
    span, gaps = hi - lo, n - 1
    return [lo + (2 * i * span + gaps) // (2 * gaps) for i in range(n)]


def generate_symmetric_schedule(config: ScheduleConfig, step: int = 0,
                                rng=None) -> list:
    """One assignment per trader for a symmetric market.

    Without ``rng``, buyer ``B{i}`` holds the i-th highest limit and seller
    ``S{i}`` the i-th lowest, so index 0 is the most intra-marginal trader on
    each side. With ``rng`` the limits are randomly permuted over trader ids
    within each side; callers keep that mapping fixed for a whole session.
    """
    limits = schedule_limits(config)
    buy_limits = sorted(limits, reverse=True)
    sell_limits = list(limits)
    if rng is not None:
        rng.shuffle(buy_limits)
        rng.shuffle(sell_limits)
    out = [Assignment(tid, Side.BID, lim, step) for tid, lim in zip(buyer_ids(config.n), buy_limits)]
    out += [Assignment(tid, Side.ASK, lim, step) for tid, lim in zip(seller_ids(config.n), sell_limits)]
    return out


def theoretical_equilibrium(assignments: Iterable[Assignment]) -> EquilibriumInfo:
    """Competitive equilibrium of the stepped supply and demand curves.

    ``q0`` is the largest q whose q-th highest buyer limit is at least the
    q-th lowest seller limit; the price range is every price at which q0
    units can trade, ``[q0-th lowest seller limit, q0-th highest buyer limit]``.
    """
    assignments = list(assignments)
    bids = sorted((a.limit for a in assignments if a.side is Side.BID), reverse=True)
    asks = sorted(a.limit for a in assignments if a.side is Side.ASK)
    if not bids or not asks:
        raise ScheduleError("need at least one buyer and one seller")
    q0 = 0
    for b, s in zip(bids, asks):
        if b < s:
            break
        q0 += 1
    if q0 == 0:
        return EquilibriumInfo(None, None, 0)
    return EquilibriumInfo(asks[q0 - 1], bids[q0 - 1], q0)


def replenishment_steps(config: ScheduleConfig) -> list:
    return list(range(0, config.session_length, config.replenish_interval))


SCHEDULE_HEADER = ["trader_id", "side", "limit"]


def write_schedule_csv(assignments: Iterable[Assignment], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(SCHEDULE_HEADER)
    for a in assignments:
        writer.writerow([a.trader_id, a.side.value, format_currency(a.limit)])


def read_schedule_csv(fh) -> list:
    return [Assignment(r["trader_id"], Side(r["side"]), to_ticks(r["limit"]))
            for r in csv.DictReader(fh)]
