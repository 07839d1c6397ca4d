"""Zero-Intelligence-Plus: a profit margin adapted by Widrow-Hoff learning.

Margins are non-negative for both sides: buyers quote ``L*(1 - margin)`` and
sellers ``L*(1 + margin)``. The update rules follow the original ZIP decision
tree, written here from the buyer's point of view (sellers mirror it):

* a trade at price p: if the buyer's quote is at or above p it could have
  paid less, so it raises its margin toward a target just below p; if it was
  priced out of a trade that hit a resting bid and is still working its
  order, it lowers its margin toward a target just above p;
* a new bid posted above the buyer's quote (and now the best bid) lowers the
  margin toward a target just above that bid.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..exchange import EventKind, Side
from .base import Trader, clamp_quote, round_quote

BETA_RANGE = (0.1, 0.5)
MOMENTUM_RANGE = (0.0, 0.1)
MARGIN_RANGE = (0.05, 0.35)
RELATIVE_PERTURBATION = 0.05
ABSOLUTE_PERTURBATION = 5  # ticks


@dataclass
class ZipState:
    margin: float
    beta: float
    momentum: float
    momentum_acc: float = 0.0
    last_quote: Optional[int] = None

    @classmethod
    def draw(cls, rng) -> "ZipState":
        return cls(
            margin=rng.uniform(*MARGIN_RANGE),
            beta=rng.uniform(*BETA_RANGE),
            momentum=rng.uniform(*MOMENTUM_RANGE),
        )


def zip_price(state: ZipState, limit: int, side: Side) -> float:
    if side is Side.BID:
        return limit * (1.0 - state.margin)
    return limit * (1.0 + state.margin)


def zip_quote(state: ZipState, limit: int, side: Side, min_price: int = 1,
              max_price: int = 200) -> int:
    price = round_quote(zip_price(state, limit, side), side)
    return clamp_quote(price, limit, side, min_price, max_price)


def _target_up(price: float, rng) -> float:
    return price * (1.0 + RELATIVE_PERTURBATION * rng.random()) + ABSOLUTE_PERTURBATION * rng.random()


def _target_down(price: float, rng) -> float:
    return price * (1.0 - RELATIVE_PERTURBATION * rng.random()) - ABSOLUTE_PERTURBATION * rng.random()


def _adjust_margin(state: ZipState, limit: int, side: Side, target: float,
                   min_price: int, max_price: int) -> None:
    current = zip_price(state, limit, side)
    delta = state.beta * (target - current)
    state.momentum_acc = state.momentum * state.momentum_acc + (1.0 - state.momentum) * delta
    new_price = current + state.momentum_acc
    if side is Side.BID:
        margin = 1.0 - new_price / limit
        upper = 1.0 - min_price / limit
    else:
        margin = new_price / limit - 1.0
        upper = max_price / limit - 1.0
    state.margin = min(max(margin, 0.0), upper)


def zip_respond(state: ZipState, event, book, *, limit: Optional[int], side: Side,
                active: bool, rng, min_price: int = 1, max_price: int = 200) -> ZipState:
    """Update ``state`` in place after a market event and return it."""
    if limit is None:
        return state
    kind = event.kind
    target = None
    if kind is EventKind.TRADE:
        quote = zip_quote(state, limit, side, min_price, max_price)
        p = event.payload.price
        if side is Side.BID:
            if quote >= p:
                target = _target_down(p, rng)
            elif active and event.payload.aggressor is Side.ASK:
                target = _target_up(p, rng)
        else:
            if quote <= p:
                target = _target_up(p, rng)
            elif active and event.payload.aggressor is Side.BID:
                target = _target_down(p, rng)
    elif kind is EventKind.ORDER_POSTED and active and event.payload.side is side:
        o = event.payload
        quote = zip_quote(state, limit, side, min_price, max_price)
        if side is Side.BID and o.price >= quote and o.price == book.best_bid:
            target = _target_up(o.price, rng)
        elif side is Side.ASK and o.price <= quote and o.price == book.best_ask:
            target = _target_down(o.price, rng)
    if target is not None:
        _adjust_margin(state, limit, side, target, min_price, max_price)
    return state


class ZIPTrader(Trader):
    strategy = "ZIP"
    stateful = True

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.state = ZipState.draw(self.rng)

    def quote(self, limit: int, book) -> Optional[int]:
        q = zip_quote(self.state, limit, self.side, self.min_price, self.max_price)
        self.state.last_quote = q
        return q

    def respond(self, event, book) -> None:
        zip_respond(self.state, event, book, limit=self.limit, side=self.side,
                    active=self.assignment is not None, rng=self.rng,
                    min_price=self.min_price, max_price=self.max_price)
