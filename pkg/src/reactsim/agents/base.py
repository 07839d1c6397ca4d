"""Trader contract shared by every strategy."""
from __future__ import annotations

import math
from typing import Optional

from ..exchange import DEFAULT_MAX_PRICE, DEFAULT_MIN_PRICE, Order, Side, Trade
from ..schedules import Assignment


class AccountingError(RuntimeError):
    """A trade was booked against a trader with no working assignment."""


def round_quote(price: float, side: Side) -> int:
    """Round to a whole tick, breaking exact halves away from the other side.

    Buyers round halves down and sellers round halves up, so rounding never
    makes a quote more aggressive.
    """
    if side is Side.BID:
        return math.ceil(price - 0.5)
    return math.floor(price + 0.5)


def clamp_quote(price: int, limit: int, side: Side, min_price: int, max_price: int) -> int:
    """Apply the no-loss bound, then the system price domain."""
    if side is Side.BID:
        price = min(price, limit)
    else:
        price = max(price, limit)
    return max(min_price, min(max_price, price))


class Trader:
    """Base class: holds the assignment, books profit, delegates pricing.

    Subclasses implement :meth:`quote`; stateful ones also override
    :meth:`respond`. Profit is kept in ticks.
    """

    strategy = "BASE"
    stateful = False

    def __init__(self, trader_id: str, side: Side, rng, min_price: int = DEFAULT_MIN_PRICE,
                 max_price: int = DEFAULT_MAX_PRICE, floor_price: Optional[int] = None):
        self.trader_id = trader_id
        self.side = side
        self.rng = rng
        self.min_price = min_price
        self.max_price = max_price
        # lowest sensible buy quote when there is nothing to shave from
        self.floor_price = max(min_price, floor_price if floor_price is not None else min_price)
        self.assignment: Optional[Assignment] = None
        self.limit: Optional[int] = None
        self.profit = 0
        self.n_trades = 0

    def __repr__(self):
        return f"{type(self).__name__}({self.trader_id!r}, {self.side.value})"

    @property
    def active(self) -> bool:
        return self.assignment is not None

    def assign(self, assignment: Assignment) -> None:
        if assignment.side is not self.side:
            raise ValueError(f"{self.trader_id} is a {self.side.value} trader")
        self.assignment = assignment
        self.limit = assignment.limit

    def cancel_assignment(self) -> None:
        self.assignment = None

    def get_order(self, book, step: int = 0) -> Optional[Order]:
        if self.assignment is None:
            return None
        price = self.quote(self.assignment.limit, book)
        if price is None:
            return None
        return Order(self.trader_id, self.side, price, step)

    def quote(self, limit: int, book) -> Optional[int]:
        raise NotImplementedError

    def respond(self, event, book) -> None:
        pass

    def record_profit(self, trade: Trade) -> int:
        """Book the surplus from ``trade`` and retire the assignment."""
        if self.assignment is None:
            raise AccountingError(f"{self.trader_id} traded without an active assignment")
        limit = self.assignment.limit
        if self.side is Side.BID:
            if trade.buyer_id != self.trader_id:
                raise AccountingError(f"{self.trader_id} is not the buyer in {trade}")
            gained = limit - trade.price
        else:
            if trade.seller_id != self.trader_id:
                raise AccountingError(f"{self.trader_id} is not the seller in {trade}")
            gained = trade.price - limit
        self.profit += gained
        self.n_trades += 1
        self.assignment = None
        return gained


def record_profit(trader: Trader, trade: Trade, assignment: Assignment) -> int:
    """Functional wrapper: check ``assignment`` is the one being filled, then book it."""
    if trader.assignment is None or trader.assignment != assignment:
        raise AccountingError(f"{trader.trader_id} has no active assignment matching {assignment}")
    return trader.record_profit(trade)
