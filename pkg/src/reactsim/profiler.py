"""Per-strategy compute-time measurement.

Times are taken inside real market sessions of several sizes, mixes and
replenishment intervals, so every strategy sees the books and events it
would meet in an experiment. Each trader's
``get_order`` and ``respond`` are wrapped with a monotonic nanosecond clock;
stateless traders receive every event too, so their (trivial) respond cost
is measured rather than assumed. When the clock is too coarse for single
calls, calls are timed in batches on the same inputs and divided; the
repeated calls change trader state, so batched sessions follow a different
trajectory from unbatched ones.
"""
from __future__ import annotations

import csv
import dataclasses
import math
import os
import time
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .agents import STRATEGIES
from .market import MarketSession, SessionConfig

# Published reference reaction times, microseconds.
TABLE2 = {"GVWY": 4.2, "SHVR": 6.9, "ZIC": 7.1, "ZIP": 8.4, "AA": 9.5}
CSV_FIELDS = ("strategy", "get_order_us", "respond_us", "combined_us", "calls")
BATCH_SIZE = 1000
WORKLOADS = ((10, 30), (20, 60), (6, 15))  # (traders per side, replenish interval)


class ProfilerError(ValueError):
    pass


class PrecisionWarning(UserWarning):
    """The clock cannot resolve single calls; batched timing was used."""


@dataclass
class ProfileRow:
    strategy: str
    get_order_us: float
    respond_us: float
    calls: int

    @property
    def combined_us(self) -> float:
        return self.get_order_us + self.respond_us


@dataclass
class ProfileReport:
    rows: dict = field(default_factory=dict)
    batched: bool = False

    def __getitem__(self, strategy: str) -> ProfileRow:
        return self.rows[strategy]

    def reaction_times(self) -> dict:
        """Combined per-action time for each strategy, in microseconds."""
        return {s: r.combined_us for s, r in self.rows.items()}

    def ratios(self, baseline: str) -> dict:
        return ratios_to_baseline(self.reaction_times(), baseline)

    def write_csv(self, path) -> None:
        write_profile_csv(self, path)


def ratios_to_baseline(times: Mapping[str, float], baseline: str) -> dict:
    """``R_s / R_baseline`` for every strategy."""
    if baseline not in times:
        raise ProfilerError(f"baseline {baseline!r} not in {sorted(times)}")
    base = times[baseline]
    if not base > 0:
        raise ProfilerError(f"baseline {baseline} has non-positive time {base}")
    return {s: t / base for s, t in times.items()}


def clock_resolution_ns() -> float:
    return time.get_clock_info("perf_counter").resolution * 1e9


def _mean(xs: list) -> float:
    # No trimming: the slow tail includes genuine work such as trade updates.
    return math.fsum(xs) / len(xs) if xs else 0.0


class _Timer:
    """Collects per-call durations (ns) for one strategy and method."""

    def __init__(self, batched: bool, warmup: int):
        self.batched = batched
        self.warmup = warmup
        self.seen = 0
        self.samples: list = []

    def time(self, fn, *args):
        clock = time.perf_counter_ns
        if self.batched:
            t0 = clock()
            for _ in range(BATCH_SIZE - 1):
                fn(*args)
            out = fn(*args)
            elapsed = (clock() - t0) / BATCH_SIZE
        else:
            t0 = clock()
            out = fn(*args)
            elapsed = clock() - t0
        self.seen += 1
        if self.seen > self.warmup:
            self.samples.append(elapsed)
        return out


def _instrument(session: MarketSession, timers: dict) -> None:
    for trader in session.traders.values():
        get_t = timers[(trader.strategy, "get_order")]
        resp_t = timers[(trader.strategy, "respond")]
        get_order, respond = trader.get_order, trader.respond
        # Only decisions count: a trader with no assignment returns at once.
        trader.get_order = (lambda book, step=0, _f=get_order, _t=get_t, _tr=trader:
                            _t.time(_f, book, step) if _tr.assignment is not None else None)
        trader.respond = lambda event, book, _f=respond, _t=resp_t: _t.time(_f, event, book)


def profile_strategies(strategies: Optional[Sequence[str]] = None, calls: int = 100_000,
                       seed: int = 0, warmup: int = 200, batched: Optional[bool] = None,
                       base: Optional[SessionConfig] = None, max_sessions: int = 10_000,
                       workloads: Sequence[tuple] = WORKLOADS) -> ProfileReport:
    """Measure mean ``get_order`` and ``respond`` times per strategy.

    Each round cycles to the next ``(n, replenish_interval)`` workload and runs
    one homogeneous session per strategy plus one session mixing all of them,
    until at least ``calls`` timed ``get_order`` calls have been collected for
    each strategy. Interleaving strategies within a round spreads clock-speed
    drift evenly. Only calls made while the trader holds an assignment are
    timed. The first ``warmup`` calls of each method are discarded.
    ``batched`` defaults to batching only when the clock resolution is
    coarser than one microsecond.
    """
    strategies = [s.upper() for s in (strategies or STRATEGIES)]
    for s in strategies:
        if s not in STRATEGIES:
            raise ProfilerError(f"unknown strategy {s!r}")
    if calls < 1:
        raise ProfilerError("calls must be >= 1")
    if not workloads:
        raise ProfilerError("need at least one workload")
    if batched is None:
        batched = clock_resolution_ns() > 1000
    if batched:
        warnings.warn(f"clock resolution {clock_resolution_ns():.0f} ns exceeds 1 us; "
                      f"timing batches of {BATCH_SIZE} calls", PrecisionWarning, stacklevel=2)
    base = base or SessionConfig()
    timers = {}
    for s in strategies:
        timers[(s, "get_order")] = _Timer(batched, warmup)
        timers[(s, "respond")] = _Timer(batched, warmup)

    def run(mix, n, interval, k):
        sched = dataclasses.replace(base.schedule, n=n, replenish_interval=interval)
        cfg = base.replace(schedule=sched, mix=mix, seed=seed + k, selection="random", reaction_times=None)
        session = MarketSession(cfg, record_quotes=False, broadcast_all=True)
        _instrument(session, timers)
        session.run()

    for k in range(max_sessions):
        pending = [s for s in strategies if len(timers[(s, "get_order")].samples) < calls]
        if not pending:
            break
        n, interval = workloads[k % len(workloads)]
        for strategy in pending:
            run(((strategy, n),), n, interval, k)
        if len(strategies) > 1:
            run(tuple((s, 2) for s in strategies), 2 * len(strategies), interval, k)
    report = ProfileReport(batched=batched)
    for s in strategies:
        g, r = timers[(s, "get_order")], timers[(s, "respond")]
        report.rows[s] = ProfileRow(s, _mean(g.samples) / 1000, _mean(r.samples) / 1000,
                                    len(g.samples))
    return report


def write_profile_csv(report: ProfileReport, path) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_FIELDS)
        for row in report.rows.values():
            w.writerow([row.strategy, f"{row.get_order_us:.4f}", f"{row.respond_us:.4f}",
                        f"{row.combined_us:.4f}", row.calls])
    os.replace(tmp, path)


def read_profile_csv(path) -> ProfileReport:
    report = ProfileReport()
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_FIELDS[:3]) - set(reader.fieldnames or ())
        if missing:
            raise ProfilerError(f"{path}: missing columns {sorted(missing)}")
        for line in reader:
            s = line["strategy"].strip().upper()
            report.rows[s] = ProfileRow(s, float(line["get_order_us"]), float(line["respond_us"]),
                                        int(line.get("calls") or 0))
    return report


def read_reaction_times(path) -> dict:
    """Reaction-time table from a profile CSV, or from ``strategy,time`` lines."""
    with open(path, newline="") as fh:
        first = fh.readline()
    if "combined_us" in first or "get_order_us" in first:
        return read_profile_csv(path).reaction_times()
    out = {}
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            if len(row) < 2:
                raise ProfilerError(f"{path}: expected 'strategy,time' rows, got {row}")
            try:
                out[row[0].strip().upper()] = float(row[1])
            except ValueError:
                if out:
                    raise ProfilerError(f"{path}: bad time {row[1]!r} for {row[0]}") from None
    return out


def format_report(report: ProfileReport, baseline: str = "SHVR") -> str:
    lines = [f"{'strategy':<8} {'get_order':>10} {'respond':>10} {'combined':>10} {'R/' + baseline:>8}"]
    ratios = report.ratios(baseline) if baseline in report.rows else {}
    for s, r in report.rows.items():
        ratio = f"{ratios[s]:.2f}" if s in ratios else "-"
        lines.append(f"{s:<8} {r.get_order_us:>10.3f} {r.respond_us:>10.3f} {r.combined_us:>10.3f} {ratio:>8}")
    return "\n".join(lines)


def iter_table(times: Mapping[str, float]) -> Iterable:
    return sorted(times.items(), key=lambda kv: kv[1])
