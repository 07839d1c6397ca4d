"""Adaptive-Aggressive trader.

Long-term layer: an exponential moving average of trade prices estimates the
equilibrium, and the root-mean-square deviation of recent trades around that
estimate (relative to it) drives the shape parameter ``theta``.

Short-term layer: an aggressiveness ``r`` in [-1, 1] is mapped through a
target-price curve. For an intra-marginal trader ``r = 0`` targets the
estimate itself and ``r -> 1`` targets the limit; ``r -> -1`` backs away
toward the system bound. ``r`` is nudged after every trade and every
uncrossed shout with Widrow-Hoff steps toward the aggressiveness that would
have matched the observed price.

Bidding layer: the opposite best is accepted outright once it is within the
target. Otherwise the quote closes ``1/eta`` of the gap between the own-side
best and a reach price just beyond the opposite best, capped by the limit.
Until any trade has been seen there is no estimate, so quotes are uniform
random within the no-loss bounds.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from ..exchange import EventKind, Side
from .base import Trader, clamp_quote, round_quote

SHORT_RATE_RANGE = (0.1, 0.5)
LONG_RATE_RANGE = (0.1, 0.5)
INITIAL_R_RANGE = (-0.3, 0.0)
THETA_MIN, THETA_MAX, THETA_INIT = -8.0, 2.0, -2.0
ALPHA_SHAPE = 2.0
RELATIVE_STEP = 0.05
ABSOLUTE_STEP = 0.01
OFFER_CHANGE_RATE = 1.6
EMA_WEIGHT = 0.2
HISTORY_WINDOW = 30


@dataclass
class AaState:
    aggressiveness: float = 0.0
    theta: float = THETA_INIT
    short_rate: float = 0.3
    long_rate: float = 0.3
    ema_weight: float = EMA_WEIGHT
    estimate: Optional[float] = None
    volatility: float = 0.0
    history: deque = field(default_factory=lambda: deque(maxlen=HISTORY_WINDOW))
    alpha_min: Optional[float] = None
    alpha_max: Optional[float] = None

    @classmethod
    def draw(cls, rng, ema_weight: float = EMA_WEIGHT, window: int = HISTORY_WINDOW) -> "AaState":
        return cls(
            aggressiveness=rng.uniform(*INITIAL_R_RANGE),
            short_rate=rng.uniform(*SHORT_RATE_RANGE),
            long_rate=rng.uniform(*LONG_RATE_RANGE),
            ema_weight=ema_weight,
            history=deque(maxlen=window),
        )


def is_intramarginal(limit: float, side: Side, estimate: float) -> bool:
    if side is Side.BID:
        return limit >= estimate
    return limit <= estimate


def _curve(s: float, theta: float) -> float:
    """(e^(s*theta) - 1) / (e^theta - 1) on s in [0, 1]: 0 -> 0, 1 -> 1, increasing."""
    if abs(theta) < 1e-9:
        return s
    return math.expm1(s * theta) / math.expm1(theta)


def _curve_inverse(y: float, theta: float) -> float:
    y = min(max(y, 0.0), 1.0)
    if abs(theta) < 1e-9:
        return y
    return math.log1p(y * math.expm1(theta)) / theta


def aa_target(limit: float, side: Side, estimate: float, r: float, theta: float,
              max_price: float = 200) -> float:
    """Target price for aggressiveness ``r``.

    Non-decreasing in ``r`` for buyers and non-increasing for sellers.
    """
    if side is Side.BID:
        if limit >= estimate:
            if r <= 0:
                return estimate * (1.0 - _curve(-r, theta))
            return estimate + (limit - estimate) * _curve(r, theta)
        if r <= 0:
            return limit * (1.0 - _curve(-r, theta))
        return float(limit)
    if limit <= estimate:
        if r <= 0:
            return estimate + (max_price - estimate) * _curve(-r, theta)
        return estimate - (estimate - limit) * _curve(r, theta)
    if r <= 0:
        return limit + (max_price - limit) * _curve(-r, theta)
    return float(limit)


def aa_r_shout(limit: float, side: Side, estimate: float, price: float, theta: float,
               max_price: float = 200) -> float:
    """Aggressiveness whose target equals ``price`` (inverse of :func:`aa_target`)."""
    if side is Side.BID:
        if limit >= estimate:
            if price <= estimate:
                return -_curve_inverse(1.0 - price / estimate, theta)
            if limit == estimate:
                return 1.0
            return _curve_inverse((price - estimate) / (limit - estimate), theta)
        if price >= limit:
            return 0.0
        return -_curve_inverse(1.0 - price / limit, theta)
    if limit <= estimate:
        if price >= estimate:
            if max_price <= estimate:
                return 0.0
            return -_curve_inverse((price - estimate) / (max_price - estimate), theta)
        if limit == estimate:
            return 1.0
        return _curve_inverse((estimate - price) / (estimate - limit), theta)
    if price <= limit:
        return 0.0
    if max_price <= limit:
        return 0.0
    return -_curve_inverse((price - limit) / (max_price - limit), theta)


def aa_estimate(state: AaState, price: float) -> AaState:
    """Fold a trade price into the equilibrium estimate and volatility."""
    if state.estimate is None:
        state.estimate = float(price)
    else:
        state.estimate += state.ema_weight * (price - state.estimate)
    state.history.append(price)
    est = state.estimate
    state.volatility = math.sqrt(sum((p - est) ** 2 for p in state.history) / len(state.history))
    return state


def _update_theta(state: AaState) -> None:
    alpha = state.volatility / state.estimate if state.estimate > 0 else 0.0
    if state.alpha_min is None:
        state.alpha_min = state.alpha_max = alpha
    else:
        state.alpha_min = min(state.alpha_min, alpha)
        state.alpha_max = max(state.alpha_max, alpha)
    if state.alpha_max > state.alpha_min:
        a = (alpha - state.alpha_min) / (state.alpha_max - state.alpha_min)
    else:
        a = 0.5
    desired = THETA_MIN + (THETA_MAX - THETA_MIN) * (1.0 - a * math.exp(ALPHA_SHAPE * (a - 1.0)))
    state.theta += state.long_rate * (desired - state.theta)


def _nudge(state: AaState, r_shout: float, more_aggressive: bool) -> None:
    if more_aggressive:
        desired = (1.0 + RELATIVE_STEP) * r_shout + ABSOLUTE_STEP
    else:
        desired = (1.0 - RELATIVE_STEP) * r_shout - ABSOLUTE_STEP
    r = state.aggressiveness + state.short_rate * (desired - state.aggressiveness)
    state.aggressiveness = min(max(r, -1.0), 1.0)


def aa_respond(state: AaState, event, book, *, limit: Optional[int], side: Side,
               max_price: int = 200) -> AaState:
    """Update ``state`` in place after a market event and return it."""
    kind = event.kind
    if kind is EventKind.TRADE:
        p = event.payload.price
        aa_estimate(state, p)
        _update_theta(state)
        if limit is None:
            return state
        est = state.estimate
        target = aa_target(limit, side, est, state.aggressiveness, state.theta, max_price)
        r_shout = aa_r_shout(limit, side, est, p, state.theta, max_price)
        if side is Side.BID:
            _nudge(state, r_shout, more_aggressive=target < p)
        else:
            _nudge(state, r_shout, more_aggressive=target > p)
    elif kind is EventKind.ORDER_POSTED:
        o = event.payload
        if limit is None or state.estimate is None or o.side is not side:
            return state
        est = state.estimate
        target = aa_target(limit, side, est, state.aggressiveness, state.theta, max_price)
        if (side is Side.BID and target <= o.price) or (side is Side.ASK and target >= o.price):
            _nudge(state, aa_r_shout(limit, side, est, o.price, state.theta, max_price), True)
    return state


def aa_quote(state: AaState, limit: int, side: Side, book, rng, min_price: int = 1,
             max_price: int = 200) -> Optional[int]:
    """Next quote, or ``None`` when the trader cannot improve the book profitably."""
    if state.estimate is None:
        if side is Side.BID:
            return rng.randint(min_price, limit)
        return rng.randint(limit, max_price)
    bb, ba = book.best_bid, book.best_ask
    target = aa_target(limit, side, state.estimate, state.aggressiveness, state.theta, max_price)
    if side is Side.BID:
        if ba is not None and ba <= target:
            return clamp_quote(ba, limit, side, min_price, max_price)
        ob = bb if bb is not None else min_price
        if limit <= ob:
            return None
        oa = ba if ba is not None else max_price
        reach = min(limit, (1.0 + RELATIVE_STEP) * oa)
        price = ob + (reach - ob) / OFFER_CHANGE_RATE
    else:
        if bb is not None and bb >= target:
            return clamp_quote(bb, limit, side, min_price, max_price)
        oa = ba if ba is not None else max_price
        if limit >= oa:
            return None
        ob = bb if bb is not None else min_price
        reach = max(limit, (1.0 - RELATIVE_STEP) * ob)
        price = oa - (oa - reach) / OFFER_CHANGE_RATE
    return clamp_quote(round_quote(price, side), limit, side, min_price, max_price)


def aa_margin(state: AaState, limit: int, side: Side, max_price: int = 200) -> Optional[float]:
    """Profit margin implied by the current target, ``None`` before any trade."""
    if state.estimate is None:
        return None
    target = aa_target(limit, side, state.estimate, state.aggressiveness, state.theta, max_price)
    if side is Side.BID:
        return 1.0 - target / limit
    return target / limit - 1.0


class AATrader(Trader):
    strategy = "AA"
    stateful = True

    def __init__(self, *args, ema_weight: float = EMA_WEIGHT, window: int = HISTORY_WINDOW, **kwargs):
        super().__init__(*args, **kwargs)
        self.state = AaState.draw(self.rng, ema_weight, window)

    def quote(self, limit: int, book) -> Optional[int]:
        return aa_quote(self.state, limit, self.side, book, self.rng, self.min_price, self.max_price)

    def respond(self, event, book) -> None:
        aa_respond(self.state, event, book, limit=self.limit, side=self.side, max_price=self.max_price)
