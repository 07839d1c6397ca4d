"""One market session: population, exchange, selection model and the step loop."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .agents import STRATEGIES, UnknownStrategyError, make_trader
from .exchange import EventKind, OrderBook, Side, Trade
from .scheduler import ORDER_A, ORDER_B, SelectionConfigError, make_selection
from .schedules import Assignment, ScheduleConfig, buyer_ids, generate_symmetric_schedule, seller_ids

SELECTION_KINDS = ("random", "fixed", "rank", "proportional")


class SessionConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SessionConfig:
    """Everything needed to reproduce one session.

    ``mix`` lists ``(strategy, traders per side)``. ``reaction_times`` and
    ``ranks`` may be keyed by trader id or by strategy token; a trader id
    entry wins over its strategy's entry. With ``shuffle`` limits are dealt
    at random; ``redeal`` deals them afresh at every replenishment.
    """

    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    mix: tuple = (("ZIC", 10),)
    selection: str = "random"
    reaction_times: Optional[Mapping[str, float]] = None
    ranks: Optional[Mapping[str, float]] = None
    seed: int = 0
    min_price: int = 1
    max_price: int = 200
    shuffle: bool = True
    redeal: bool = True

    def __post_init__(self):
        mix = tuple((str(s).upper(), int(c)) for s, c in self.mix)
        object.__setattr__(self, "mix", mix)
        for strategy, count in mix:
            if strategy not in STRATEGIES:
                raise UnknownStrategyError(f"unknown strategy {strategy!r}")
            if count < 0:
                raise SessionConfigError(f"negative count for {strategy}")
        if sum(c for _, c in mix) != self.schedule.n:
            raise SessionConfigError(
                f"mix has {sum(c for _, c in mix)} traders per side but the schedule has n={self.schedule.n}")
        if self.selection not in SELECTION_KINDS:
            raise SessionConfigError(f"unknown selection model {self.selection!r}")
        if self.selection == "proportional" and not self.reaction_times:
            raise SessionConfigError("proportional selection needs reaction times")
        if not 1 <= self.min_price <= self.schedule.price_low <= self.schedule.price_high <= self.max_price:
            raise SessionConfigError("schedule prices must lie inside the system price domain")

    def strategies(self) -> list:
        return sorted({s for s, c in self.mix if c > 0})

    def replace(self, **changes) -> "SessionConfig":
        from dataclasses import replace
        return replace(self, **changes)


@dataclass
class SessionResult:
    """Outcome of one session. ``limits`` are those of the final period;
    ``trade_limits`` holds the (buyer, seller) limits behind each trade."""

    seed: int
    strategies: dict
    limits: dict
    profits: dict
    trades: list
    quotes: list = field(default_factory=list)
    actions: dict = field(default_factory=dict)
    trade_limits: list = field(default_factory=list)

    def members(self, strategy: str, side: Optional[Side] = None) -> list:
        out = [t for t, s in self.strategies.items() if s == strategy]
        if side is not None:
            prefix = "B" if side is Side.BID else "S"
            out = [t for t in out if t.startswith(prefix)]
        return out

    def strategy_totals(self) -> dict:
        totals: dict = {}
        for tid, s in self.strategies.items():
            totals[s] = totals.get(s, 0) + self.profits[tid]
        return totals

    def strategy_counts(self) -> dict:
        counts: dict = {}
        for s in self.strategies.values():
            counts[s] = counts.get(s, 0) + 1
        return counts

    def strategy_means(self) -> dict:
        """Mean profit per trader for each strategy, in ticks."""
        counts = self.strategy_counts()
        return {s: total / counts[s] for s, total in self.strategy_totals().items()}

    def group_mean(self, trader_ids) -> float:
        trader_ids = list(trader_ids)
        return sum(self.profits[t] for t in trader_ids) / len(trader_ids)

    def total_profit(self) -> int:
        return sum(self.profits.values())

    def surplus_from_trades(self) -> int:
        return sum(b - s for b, s in self.trade_limits)


def assign_strategies(trader_ids, limits: Mapping[str, int], mix, rng=None) -> dict:
    """Map one side's traders to strategies.

    With equal counts per strategy the traders are ranked by limit and each
    consecutive block of ranks receives one trader of every strategy in a
    random order, so no strategy is systematically dealt better limits and
    the between-session variance of strategy means stays small. Unequal
    counts fall back to a plain shuffle. Without ``rng`` strategies follow
    trader index in ``mix`` order.
    """
    strats = [s for s, c in mix for _ in range(c)]
    if rng is None:
        return dict(zip(trader_ids, strats))
    counts = {c for _, c in mix if c > 0}
    kinds = [s for s, c in mix if c > 0]
    if len(counts) != 1 or len(kinds) == 1:
        rng.shuffle(strats)
        return dict(zip(trader_ids, strats))
    ranked = sorted(trader_ids, key=lambda t: limits[t])
    out = {}
    for i in range(0, len(ranked), len(kinds)):
        block = list(kinds)
        rng.shuffle(block)
        out.update(zip(ranked[i:i + len(kinds)], block))
    return out


def deal_limits(trader_ids, strategies: Mapping[str, str], values, rng) -> dict:
    """Deal one side's limit values to its traders at random.

    When every strategy has the same count, each consecutive block of ranked
    values goes one to each strategy, so strategy means stay balanced as in
    :func:`assign_strategies`.
    """
    trader_ids = list(trader_ids)
    kinds = sorted({strategies[t] for t in trader_ids})
    members = {k: [t for t in trader_ids if strategies[t] == k] for k in kinds}
    values = sorted(values)
    if len(kinds) == 1 or len({len(m) for m in members.values()}) != 1:
        rng.shuffle(values)
        return dict(zip(trader_ids, values))
    pools: dict = {k: [] for k in kinds}
    for i in range(0, len(values), len(kinds)):
        block = list(kinds)
        rng.shuffle(block)
        for k, v in zip(block, values[i:i + len(kinds)]):
            pools[k].append(v)
    out = {}
    for k in kinds:
        rng.shuffle(pools[k])
        out.update(zip(members[k], pools[k]))
    return out


class MarketSession:
    """Mutable state of a running session. Use :func:`run_session` normally.

    With ``broadcast_all`` every trader receives every event; otherwise only
    stateful traders do, which is equivalent because stateless traders ignore
    events.
    """

    def __init__(self, config: SessionConfig, record_quotes: bool = True, broadcast_all: bool = False):
        self.config = config
        self.rng = random.Random(config.seed)
        rng = self.rng
        sched = config.schedule
        n = sched.n
        self.buyers = buyer_ids(n)
        self.sellers = seller_ids(n)
        self.trader_ids = self.buyers + self.sellers

        assignments = generate_symmetric_schedule(sched, 0, rng if config.shuffle else None)
        self.limits = {a.trader_id: a.limit for a in assignments}

        self.strategies = {}
        for ids in (self.buyers, self.sellers):
            self.strategies.update(assign_strategies(ids, self.limits, config.mix,
                                                     rng if config.shuffle else None))

        self.traders = {}
        for tid in self.trader_ids:
            side = Side.BID if tid in self.strategies and tid.startswith("B") else Side.ASK
            self.traders[tid] = make_trader(self.strategies[tid], tid, side, rng,
                                            min_price=config.min_price, max_price=config.max_price,
                                            floor_price=sched.price_low)
        self.book = OrderBook(config.min_price, config.max_price, self.trader_ids)
        listeners = self.trader_ids if broadcast_all else [t for t in self.trader_ids if self.traders[t].stateful]
        self._listeners = [self.traders[t] for t in sorted(listeners)]

        try:
            self.selection = make_selection(
                config.selection, self.buyers, self.sellers,
                ranks=self._per_trader(config.ranks),
                reaction_times=self._per_trader(config.reaction_times),
                initial_order=rng.choice((ORDER_A, ORDER_B)),
            )
        except SelectionConfigError as exc:
            raise SessionConfigError(str(exc)) from exc

        self.replenish_at = set(range(0, sched.session_length, sched.replenish_interval))
        self.record_quotes = record_quotes
        self.trades: list = []
        self.trade_limits: list = []
        self.quotes: list = []
        self.actions = {t: 0 for t in self.trader_ids}
        self.step_index = 0

    def _per_trader(self, table):
        if table is None:
            return None
        out = {}
        for tid in self.trader_ids:
            if tid in table:
                out[tid] = table[tid]
            elif self.strategies[tid] in table:
                out[tid] = table[self.strategies[tid]]
        return out

    def _broadcast(self, event) -> None:
        book = self.book
        for trader in self._listeners:
            trader.respond(event, book)

    def replenish(self, step: int) -> None:
        if step > 0 and self.config.shuffle and self.config.redeal:
            for ids in (self.buyers, self.sellers):
                self.limits.update(deal_limits(ids, self.strategies, [self.limits[t] for t in ids], self.rng))
        for tid in self.trader_ids:
            trader = self.traders[tid]
            ev = self.book.cancel(tid)
            if ev is not None:
                self._broadcast(ev)
            side = trader.side
            trader.assign(Assignment(tid, side, self.limits[tid], step))

    def act(self, tid: str, step: int) -> None:
        trader = self.traders[tid]
        if trader.assignment is None:
            return
        order = trader.get_order(self.book, step)
        self.actions[tid] += 1
        if order is None:
            return
        if self.record_quotes:
            self.quotes.append(order)
        for ev in self.book.submit(order):
            if ev.kind is EventKind.TRADE:
                trade: Trade = ev.payload
                self.trade_limits.append((self.traders[trade.buyer_id].limit, self.traders[trade.seller_id].limit))
                self.traders[trade.buyer_id].record_profit(trade)
                self.traders[trade.seller_id].record_profit(trade)
                self.trades.append(trade)
            self._broadcast(ev)

    def step(self) -> None:
        step = self.step_index
        if step in self.replenish_at:
            self.replenish(step)
        for tid in self.selection.sequence(step, self.rng):
            self.act(tid, step)
        self.step_index += 1

    def run(self) -> SessionResult:
        for _ in range(self.config.schedule.session_length - self.step_index):
            self.step()
        return self.result()

    def result(self) -> SessionResult:
        return SessionResult(
            seed=self.config.seed,
            strategies=dict(self.strategies),
            limits=dict(self.limits),
            profits={t: self.traders[t].profit for t in self.trader_ids},
            trades=list(self.trades),
            quotes=list(self.quotes),
            actions=dict(self.actions),
            trade_limits=list(self.trade_limits),
        )


def run_session(config: SessionConfig, record_quotes: bool = True) -> SessionResult:
    return MarketSession(config, record_quotes=record_quotes).run()
