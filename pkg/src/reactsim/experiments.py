"""Replicated market experiments, reaction-time sweeps and their summaries.

Each repetition runs one session with its own seed, derived from a master
seed and the repetition counter. The sample for a group is one number per
session: the mean profit per trader in that group.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .exchange import Side
from .market import SessionConfig, SessionResult, run_session
from .stats import TTestResult, confidence_interval_95, two_sample_t_test

DEFAULT_REPETITIONS = 100

GroupFn = Callable[[SessionResult], float]


class ExperimentError(ValueError):
    pass


def derive_seeds(master_seed: int, repetitions: int) -> list:
    """Per-repetition seeds: the ``i``-th seed depends only on (master, i)."""
    return [int(np.random.SeedSequence([master_seed, i]).generate_state(1, dtype=np.uint32)[0])
            for i in range(repetitions)]


# ---------------------------------------------------------------- groups

def strategy_group(strategy: str, side: Optional[Side] = None) -> GroupFn:
    def fn(result: SessionResult) -> float:
        members = result.members(strategy, side)
        if not members:
            raise ExperimentError(f"no {strategy} traders in the session")
        return result.group_mean(members)
    return fn


def trader_group(trader_ids: Sequence[str]) -> GroupFn:
    ids = list(trader_ids)

    def fn(result: SessionResult) -> float:
        return result.group_mean(ids)
    return fn


def side_group(side: Side) -> GroupFn:
    prefix = "B" if side is Side.BID else "S"

    def fn(result: SessionResult) -> float:
        return result.group_mean([t for t in result.profits if t.startswith(prefix)])
    return fn


def strategy_groups(config: SessionConfig) -> dict:
    return {s: strategy_group(s) for s in config.strategies()}


def position_groups(n: int) -> dict:
    """One group per trader index and side: ``B0``, ``S0``, ``B1`` ..."""
    out = {}
    for i in range(n):
        out[f"B{i}"] = trader_group([f"B{i:02d}"])
        out[f"S{i}"] = trader_group([f"S{i:02d}"])
    return out


def rank_half_groups(n: int) -> dict:
    """Fast and slow halves of each side, matching :func:`half_split_ranks`."""
    half = n // 2
    return {
        "fast_buyers": trader_group([f"B{i:02d}" for i in range(half)]),
        "slow_buyers": trader_group([f"B{i:02d}" for i in range(half, n)]),
        "fast_sellers": trader_group([f"S{i:02d}" for i in range(half)]),
        "slow_sellers": trader_group([f"S{i:02d}" for i in range(half, n)]),
        "buyers": side_group(Side.BID),
        "sellers": side_group(Side.ASK),
    }


# ---------------------------------------------------------------- results

@dataclass
class GroupStats:
    mean: float
    ci_half: float
    n: int


@dataclass
class ExperimentSummary:
    """Per-group samples (ticks) and their summary statistics."""

    config: SessionConfig
    master_seed: int
    seeds: list
    samples: dict
    sessions: list = field(default_factory=list, repr=False)

    @property
    def repetitions(self) -> int:
        return len(self.seeds)

    def stats(self, group: str) -> GroupStats:
        xs = self.samples[group]
        mean, half = confidence_interval_95(xs)
        return GroupStats(mean, half, len(xs))

    def mean(self, group: str) -> float:
        xs = self.samples[group]
        return math.fsum(xs) / len(xs)

    def ci_half(self, group: str) -> float:
        return self.stats(group).ci_half

    def compare(self, a: str, b: str) -> TTestResult:
        return two_sample_t_test(self.samples[a], self.samples[b])

    def groups(self) -> list:
        return list(self.samples)


def run_experiment(config: SessionConfig, repetitions: int = DEFAULT_REPETITIONS,
                   master_seed: int = 0, groups: Optional[Mapping[str, GroupFn]] = None,
                   keep_sessions: bool = False, workers: int = 1) -> ExperimentSummary:
    """Run ``repetitions`` independent sessions of ``config``.

    ``groups`` maps names to per-session statistics; by default there is one
    group per strategy. ``workers > 1`` fans sessions out over processes;
    results do not depend on the worker count.
    """
    if repetitions < 2:
        raise ExperimentError(f"repetitions must be >= 2, got {repetitions}")
    groups = dict(groups) if groups is not None else strategy_groups(config)
    seeds = derive_seeds(master_seed, repetitions)
    configs = [config.replace(seed=s) for s in seeds]
    results = _run_all(configs, workers)
    samples = {name: [fn(r) for r in results] for name, fn in groups.items()}
    return ExperimentSummary(config, master_seed, seeds, samples,
                             sessions=results if keep_sessions else [])


def _run_one(config: SessionConfig) -> SessionResult:
    return run_session(config, record_quotes=False)


def _run_all(configs, workers: int) -> list:
    if workers <= 1:
        return [_run_one(c) for c in configs]
    from concurrent.futures import ProcessPoolExecutor
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, configs, chunksize=max(1, len(configs) // (4 * workers))))


# ---------------------------------------------------------------- sweeps

@dataclass
class SweepPoint:
    r: float
    summary: ExperimentSummary
    mean_aa: float
    mean_other: float
    ci_aa: float
    ci_other: float
    test: TTestResult


@dataclass
class SweepResult:
    pair: tuple
    points: list

    def inversion_point(self) -> Optional[float]:
        """First R at which the slowed strategy's mean drops below its competitor's."""
        for p in self.points:
            if p.mean_aa < p.mean_other:
                return p.r
        return None


def balanced_config(pair: Sequence[str], base: Optional[SessionConfig] = None) -> SessionConfig:
    base = base or SessionConfig()
    n = base.schedule.n
    if n % 2:
        raise ExperimentError(f"a balanced test needs an even number of traders per side, got {n}")
    a, b = (s.upper() for s in pair)
    if a == b:
        raise ExperimentError("a balanced test needs two different strategies")
    return base.replace(mix=((a, n // 2), (b, n // 2)))


def sensitivity_sweep(pair: Sequence[str] = ("AA", "SHVR"), r_values: Sequence[float] = (1, 2, 4, 8, 16, 40),
                      base: Optional[SessionConfig] = None, repetitions: int = DEFAULT_REPETITIONS,
                      master_seed: int = 0, workers: int = 1) -> SweepResult:
    """Slow the first strategy of ``pair`` to ``R`` times its competitor under
    speed-proportional selection, for each ``R``."""
    for r in r_values:
        if not 1 <= r <= 40:
            raise ExperimentError(f"relative reaction time must lie in [1, 40], got {r}")
    a, b = (s.upper() for s in pair)
    config = balanced_config((a, b), base)
    points = []
    for r in r_values:
        cfg = config.replace(selection="proportional", reaction_times={a: float(r), b: 1.0})
        summary = run_experiment(cfg, repetitions, master_seed, workers=workers)
        sa, sb = summary.stats(a), summary.stats(b)
        points.append(SweepPoint(float(r), summary, sa.mean, sb.mean, sa.ci_half, sb.ci_half,
                                 summary.compare(a, b)))
    return SweepResult((a, b), points)
