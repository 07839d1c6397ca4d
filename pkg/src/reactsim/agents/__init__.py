"""Trading strategies and the trader contract they share."""
from .aa import AaState, AATrader, aa_estimate, aa_quote, aa_r_shout, aa_respond, aa_target, is_intramarginal
from .base import AccountingError, Trader, clamp_quote, record_profit, round_quote
from .simple import GiveawayTrader, ShaverTrader, ZICTrader, gvwy_quote, shvr_quote, zic_quote
from .zip import ZipState, ZIPTrader, zip_quote, zip_respond

STRATEGIES = {
    "GVWY": GiveawayTrader,
    "SHVR": ShaverTrader,
    "ZIC": ZICTrader,
    "ZIP": ZIPTrader,
    "AA": AATrader,
}


class UnknownStrategyError(KeyError):
    pass


def make_trader(strategy: str, trader_id: str, side, rng, **kwargs) -> Trader:
    try:
        cls = STRATEGIES[strategy.upper()]
    except KeyError:
        raise UnknownStrategyError(f"unknown strategy {strategy!r}; expected one of {sorted(STRATEGIES)}") from None
    return cls(trader_id, side, rng, **kwargs)


__all__ = [
    "AaState", "AATrader", "AccountingError", "GiveawayTrader", "STRATEGIES", "ShaverTrader",
    "Trader", "UnknownStrategyError", "ZICTrader", "ZIPTrader", "ZipState", "aa_estimate",
    "aa_quote", "aa_r_shout", "aa_respond", "aa_target", "clamp_quote", "gvwy_quote",
    "is_intramarginal", "make_trader", "record_profit", "round_quote", "shvr_quote",
    "zic_quote", "zip_quote", "zip_respond",
]
