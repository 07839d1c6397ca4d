"""Selection models: who acts, and in what order, within each time step.

Four models are provided. Random order, fixed order and tournament ranking
let every trader act exactly once per step; speed-proportional selection lets
faster traders act several times per step.
"""
from __future__ import annotations

import math
from typing import Mapping, Optional, Sequence


class SelectionConfigError(ValueError):
    pass


ORDER_A = "A"  # s1, b1, s2, b2, ...
ORDER_B = "B"  # b1, s1, b2, s2, ...


def random_step(traders: Sequence[str], rng) -> list:
    """A uniformly random permutation of ``traders``."""
    seq = list(traders)
    rng.shuffle(seq)
    return seq


def fixed_order_step(buyers: Sequence[str], sellers: Sequence[str], step: int,
                     initial_order: str = ORDER_A) -> list:
    """Interleave sellers and buyers by index, flipping which side leads every step."""
    if len(buyers) != len(sellers):
        raise SelectionConfigError(f"fixed order needs equal sides, got {len(buyers)} buyers "
                                   f"and {len(sellers)} sellers")
    if initial_order not in (ORDER_A, ORDER_B):
        raise SelectionConfigError(f"initial order must be 'A' or 'B', got {initial_order!r}")
    sellers_first = (initial_order == ORDER_A) == (step % 2 == 0)
    seq = []
    for b, s in zip(buyers, sellers):
        seq.extend((s, b) if sellers_first else (b, s))
    return seq


def tournament_step(traders: Sequence[str], ranks: Mapping[str, float], rng) -> list:
    """Pairwise speed races, lowest rank wins.

    While more than one trader is left, two distinct traders are drawn at
    random; the first-drawn acts only if the second has a strictly higher
    rank, otherwise the second-drawn acts. The winner leaves the pool.
    """
    pool = list(traders)
    seq = []
    while len(pool) > 1:
        i, j = rng.sample(range(len(pool)), 2)
        pick = i if ranks[pool[j]] > ranks[pool[i]] else j
        seq.append(pool[pick])
        pool[pick] = pool[-1]
        pool.pop()
    seq.extend(pool)
    return seq


def action_weights(reaction_times: Mapping[str, float]) -> dict:
    """Expected actions per step: inverse reaction time, slowest trader = 1."""
    if not reaction_times:
        raise SelectionConfigError("no reaction times given")
    for tid, r in reaction_times.items():
        if not r > 0:
            raise SelectionConfigError(f"reaction time for {tid} must be positive, got {r}")
    slowest = max(reaction_times.values())
    return {tid: slowest / r for tid, r in reaction_times.items()}


def proportional_pool(reaction_times: Mapping[str, float], rng=None) -> list:
    """Biased pool holding each trader once per unit of relative speed.

    Whole parts of the weights are realised exactly; a fractional part f adds
    one extra reference with probability f, so expected counts are exact.
    Without ``rng`` fractional parts are dropped.
    """
    pool = []
    for tid, w in action_weights(reaction_times).items():
        whole = math.floor(w + 1e-9)
        frac = w - whole
        count = whole
        if frac > 1e-9 and rng is not None and rng.random() < frac:
            count += 1
        pool.extend([tid] * count)
    return pool


def proportional_step(pool: Sequence[str], rng) -> list:
    """Draw the pool empty without replacement."""
    seq = list(pool)
    rng.shuffle(seq)
    return seq


class SelectionModel:
    """Base class; ``sequence(step, rng)`` yields the action order for a step."""

    kind = "base"
    once_per_step = True

    def sequence(self, step: int, rng) -> list:
        raise NotImplementedError


class RandomSelection(SelectionModel):
    kind = "random"

    def __init__(self, traders: Sequence[str]):
        self.traders = list(traders)

    def sequence(self, step, rng):
        return random_step(self.traders, rng)


class FixedOrderSelection(SelectionModel):
    kind = "fixed"

    def __init__(self, buyers: Sequence[str], sellers: Sequence[str], initial_order: str = ORDER_A):
        fixed_order_step(buyers, sellers, 0, initial_order)  # validate now
        self.buyers = list(buyers)
        self.sellers = list(sellers)
        self.initial_order = initial_order

    def sequence(self, step, rng):
        return fixed_order_step(self.buyers, self.sellers, step, self.initial_order)


class TournamentSelection(SelectionModel):
    kind = "rank"

    def __init__(self, ranks: Mapping[str, float]):
        if not ranks:
            raise SelectionConfigError("tournament ranking needs a rank for every trader")
        self.ranks = dict(ranks)
        self.traders = list(ranks)

    def sequence(self, step, rng):
        return tournament_step(self.traders, self.ranks, rng)


class ProportionalSelection(SelectionModel):
    kind = "proportional"
    once_per_step = False

    def __init__(self, reaction_times: Mapping[str, float]):
        self.weights = action_weights(reaction_times)
        self.reaction_times = dict(reaction_times)

    def sequence(self, step, rng):
        return proportional_step(proportional_pool(self.reaction_times, rng), rng)


def half_split_ranks(buyers: Sequence[str], sellers: Sequence[str]) -> dict:
    """Ranks 1..n for the first half of each side, n+1..2n for the rest.

    Within each half buyers and sellers alternate, so both sides have fast
    and slow members.
    """
    nb, ns = len(buyers), len(sellers)
    fast = _interleave(buyers[: nb // 2], sellers[: ns // 2])
    slow = _interleave(buyers[nb // 2:], sellers[ns // 2:])
    return {tid: rank for rank, tid in enumerate(fast + slow, start=1)}


def _interleave(a: Sequence[str], b: Sequence[str]) -> list:
    out = []
    for i in range(max(len(a), len(b))):
        if i < len(a):
            out.append(a[i])
        if i < len(b):
            out.append(b[i])
    return out


def make_selection(kind: str, buyers: Sequence[str], sellers: Sequence[str], *,
                   ranks: Optional[Mapping[str, float]] = None,
                   reaction_times: Optional[Mapping[str, float]] = None,
                   initial_order: str = ORDER_A) -> SelectionModel:
    traders = list(buyers) + list(sellers)
    if kind == "random":
        return RandomSelection(traders)
    if kind == "fixed":
        return FixedOrderSelection(buyers, sellers, initial_order)
    if kind == "rank":
        ranks = ranks if ranks is not None else half_split_ranks(buyers, sellers)
        missing = set(traders) - set(ranks)
        if missing:
            raise SelectionConfigError(f"no rank for {sorted(missing)}")
        return TournamentSelection({t: ranks[t] for t in traders})
    if kind == "proportional":
        if reaction_times is None:
            raise SelectionConfigError("proportional selection needs reaction times")
        missing = set(traders) - set(reaction_times)
        if missing:
            raise SelectionConfigError(f"no reaction time for {sorted(missing)}")
        return ProportionalSelection({t: reaction_times[t] for t in traders})
    raise SelectionConfigError(f"unknown selection model {kind!r}")
