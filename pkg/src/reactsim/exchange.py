"""Single-instrument limit order book with continuous double auction matching.

Prices are integer ticks throughout (one tick = 0.01 currency units). Every
order is for a single unit and each trader may have at most one resting order;
a new order from a trader replaces the old one.
"""
from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Union

TICKS_PER_UNIT = 100
DEFAULT_MIN_PRICE = 1
DEFAULT_MAX_PRICE = 200


class RejectedOrderError(ValueError):
    """Order price or quantity outside what the exchange accepts."""


class UnknownTraderError(KeyError):
    """Order submitted on behalf of a trader the exchange does not know."""


class Side(str, enum.Enum):
    BID = "bid"
    ASK = "ask"

    @property
    def opposite(self) -> "Side":
        return Side.ASK if self is Side.BID else Side.BID


class EventKind(str, enum.Enum):
    ORDER_POSTED = "order_posted"
    ORDER_CANCELLED = "order_cancelled"
    TRADE = "trade"


def to_ticks(value: Union[float, str]) -> int:
    """Convert a currency amount (e.g. ``0.97`` or ``"0.97"``) to ticks."""
    return int(round(float(value) * TICKS_PER_UNIT))


def to_currency(ticks: float) -> float:
    return ticks / TICKS_PER_UNIT


def format_currency(ticks: int) -> str:
    sign = "-" if ticks < 0 else ""
    whole, frac = divmod(abs(int(ticks)), TICKS_PER_UNIT)
    return f"{sign}{whole}.{frac:02d}"


# Named tuples rather than frozen dataclasses: these are built on every
# action, and a frozen dataclass costs more to construct than most quotes.
class Order(NamedTuple):
    trader_id: str
    side: Side
    price: int
    step: int = 0
    quantity: int = 1


class Trade(NamedTuple):
    buyer_id: str
    seller_id: str
    price: int
    step: int
    aggressor: Side

    @property
    def passive_side(self) -> Side:
        return self.aggressor.opposite


class MarketEvent(NamedTuple):
    kind: EventKind
    payload: Union[Order, Trade]


@dataclass(frozen=True)
class LobSnapshot:
    """Aggregated, anonymised view of the book at one instant."""

    bids: tuple = ()
    asks: tuple = ()
    last_trade: Optional[Trade] = None

    @property
    def best_bid(self) -> Optional[int]:
        return self.bids[0][0] if self.bids else None

    @property
    def best_ask(self) -> Optional[int]:
        return self.asks[0][0] if self.asks else None

    @property
    def best_bid_volume(self) -> int:
        return self.bids[0][1] if self.bids else 0

    @property
    def best_ask_volume(self) -> int:
        return self.asks[0][1] if self.asks else 0

    @classmethod
    def from_levels(cls, bids=(), asks=(), last_trade=None) -> "LobSnapshot":
        """Build a snapshot from unsorted ``(price, volume)`` pairs."""
        bids = tuple(sorted(((int(p), int(v)) for p, v in bids), reverse=True))
        asks = tuple(sorted((int(p), int(v)) for p, v in asks))
        return cls(bids, asks, last_trade)


@dataclass(frozen=True)
class LobMetrics:
    """Spread, midprice and microprice, all in ticks."""

    spread: int
    midprice: float
    microprice: float


def lob_metrics(book) -> Optional[LobMetrics]:
    """Top-of-book metrics, or ``None`` when either side of the book is empty.

    The microprice weights each best price by the volume resting on its own
    side, ``(Vb*BB + Va*BA) / (Vb + Va)``. With 2 units bid at 0.97 and 1 unit
    offered at 0.99 this gives 0.977. Note that the more common convention in
    the microstructure literature weights BB by the *ask* volume instead.
    """
    bb, ba = book.best_bid, book.best_ask
    if bb is None or ba is None:
        return None
    vb, va = book.best_bid_volume, book.best_ask_volume
    return LobMetrics(
        spread=ba - bb,
        midprice=(bb + ba) / 2,
        microprice=(vb * bb + va * ba) / (vb + va),
    )


class OrderBook:
    """Limit order book with price-time priority and one order per trader.

    ``trader_ids`` restricts who may trade; ``None`` accepts anyone. The book
    also serves as the live read-only view handed to traders, exposing the
    same ``best_*`` attributes as :class:`LobSnapshot`.
    """

    def __init__(self, min_price: int = DEFAULT_MIN_PRICE, max_price: int = DEFAULT_MAX_PRICE,
                 trader_ids: Optional[Iterable[str]] = None):
        if not 1 <= min_price <= max_price:
            raise ValueError(f"invalid price domain [{min_price}, {max_price}]")
        self.min_price = min_price
        self.max_price = max_price
        self.trader_ids = None if trader_ids is None else frozenset(trader_ids)
        # trader_id -> (price, sequence number, order)
        self._bids: dict = {}
        self._asks: dict = {}
        self._seq = 0
        self.last_trade: Optional[Trade] = None
        self.best_bid: Optional[int] = None
        self.best_ask: Optional[int] = None

    def __len__(self) -> int:
        return len(self._bids) + len(self._asks)

    def resting_order(self, trader_id: str) -> Optional[Order]:
        entry = self._bids.get(trader_id) or self._asks.get(trader_id)
        return entry[2] if entry else None

    @property
    def best_bid_volume(self) -> int:
        bb = self.best_bid
        return sum(1 for p, _, _ in self._bids.values() if p == bb) if bb is not None else 0

    @property
    def best_ask_volume(self) -> int:
        ba = self.best_ask
        return sum(1 for p, _, _ in self._asks.values() if p == ba) if ba is not None else 0

    def _refresh_best(self) -> None:
        self.best_bid = max(e[0] for e in self._bids.values()) if self._bids else None
        self.best_ask = min(e[0] for e in self._asks.values()) if self._asks else None

    def _validate(self, order: Order) -> None:
        if self.trader_ids is not None and order.trader_id not in self.trader_ids:
            raise UnknownTraderError(order.trader_id)
        if order.quantity != 1:
            raise RejectedOrderError(f"quantity must be 1, got {order.quantity}")
        if not self.min_price <= order.price <= self.max_price:
            raise RejectedOrderError(
                f"price {order.price} outside [{self.min_price}, {self.max_price}]")

    def cancel(self, trader_id: str) -> Optional[MarketEvent]:
        """Remove the trader's resting order, if any."""
        entry = self._bids.pop(trader_id, None) or self._asks.pop(trader_id, None)
        if entry is None:
            return None
        self._refresh_best()
        return MarketEvent(EventKind.ORDER_CANCELLED, entry[2])

    def submit(self, order: Order) -> list:
        """Process ``order`` and return the resulting events in causal order.

        Any previous order from the same trader is cancelled first, even when
        the new order crosses. A crossing order trades one unit against the
        oldest order at the best opposing price, at that resting price.
        """
        self._validate(order)
        events = []
        cancelled = self.cancel(order.trader_id)
        if cancelled is not None:
            events.append(cancelled)

        if order.side is Side.BID:
            crosses = self.best_ask is not None and order.price >= self.best_ask
            opposite = self._asks
            best = self.best_ask
        else:
            crosses = self.best_bid is not None and order.price <= self.best_bid
            opposite = self._bids
            best = self.best_bid

        if crosses:
            counterparty = min((seq, tid) for tid, (p, seq, _) in opposite.items() if p == best)[1]
            del opposite[counterparty]
            if order.side is Side.BID:
                trade = Trade(order.trader_id, counterparty, best, order.step, Side.BID)
            else:
                trade = Trade(counterparty, order.trader_id, best, order.step, Side.ASK)
            self.last_trade = trade
            self._refresh_best()
            events.append(MarketEvent(EventKind.TRADE, trade))
        else:
            self._seq += 1
            if order.side is Side.BID:
                self._bids[order.trader_id] = (order.price, self._seq, order)
                if self.best_bid is None or order.price > self.best_bid:
                    self.best_bid = order.price
            else:
                self._asks[order.trader_id] = (order.price, self._seq, order)
                if self.best_ask is None or order.price < self.best_ask:
                    self.best_ask = order.price
            events.append(MarketEvent(EventKind.ORDER_POSTED, order))
        return events

    def snapshot(self) -> LobSnapshot:
        def levels(side):
            agg: dict = {}
            for price, _, _ in side.values():
                agg[price] = agg.get(price, 0) + 1
            return agg.items()

        return LobSnapshot.from_levels(levels(self._bids), levels(self._asks), self.last_trade)

    def orders(self, side: Side) -> list:
        """Resting orders on one side, best first, in time priority."""
        book = self._bids if side is Side.BID else self._asks
        sign = -1 if side is Side.BID else 1
        return [e[2] for e in sorted(book.values(), key=lambda e: (sign * e[0], e[1]))]


def submit_order(order: Order, book: OrderBook):
    """Functional form of :meth:`OrderBook.submit`: returns ``(snapshot, events)``."""
    events = book.submit(order)
    return book.snapshot(), events


TAPE_HEADER = ["step", "buyer_id", "seller_id", "price"]


def write_trade_tape(trades: Iterable[Trade], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TAPE_HEADER)
    for t in trades:
        writer.writerow([t.step, t.buyer_id, t.seller_id, format_currency(t.price)])


def read_trade_tape(fh) -> list:
    """Rows of a trade tape as ``(step, buyer_id, seller_id, price_ticks)``."""
    rows = []
    for row in csv.DictReader(fh):
        rows.append((int(row["step"]), row["buyer_id"], row["seller_id"], to_ticks(row["price"])))
    return rows
