"""Stateless strategies: Giveaway, Shaver and Zero-Intelligence-Constrained."""
from __future__ import annotations

from typing import Optional

from ..exchange import Side
from .base import Trader


def gvwy_quote(limit: int, side: Side) -> int:
    return limit


def shvr_quote(limit: int, side: Side, book, floor_price: int = 1, max_price: int = 200) -> int:
    """One tick inside the best price on the trader's own side, capped by the limit.

    With nothing to shave, buyers start from ``floor_price`` and sellers from
    ``max_price``.
    """
    if side is Side.BID:
        bb = book.best_bid
        price = bb + 1 if bb is not None else floor_price
        return min(price, limit)
    ba = book.best_ask
    price = ba - 1 if ba is not None else max_price
    return max(price, limit)


def zic_quote(limit: int, side: Side, rng, min_price: int = 1, max_price: int = 200) -> int:
    """Uniform whole-tick draw between the system bound and the limit."""
    if side is Side.BID:
        return rng.randint(min_price, limit)
    return rng.randint(limit, max_price)


class GiveawayTrader(Trader):
    strategy = "GVWY"

    def quote(self, limit: int, book) -> Optional[int]:
        return gvwy_quote(limit, self.side)


class ShaverTrader(Trader):
    strategy = "SHVR"

    def quote(self, limit: int, book) -> Optional[int]:
        return shvr_quote(limit, self.side, book, self.floor_price, self.max_price)


class ZICTrader(Trader):
    strategy = "ZIC"

    def quote(self, limit: int, book) -> Optional[int]:
        return zic_quote(limit, self.side, self.rng, self.min_price, self.max_price)
