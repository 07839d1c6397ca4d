"""End-to-end acceptance criteria, one test per criterion.

Each test records a pass/fail line (printed in the terminal summary) before
asserting. Stochastic criteria use 100 repetitions, 95% confidence intervals
and a two-tailed pooled-variance t-test at alpha = 0.05, with master seed 0.
"""
import collections
import itertools
import random

import pytest

from reactsim import experiments as ex
from reactsim.agents import STRATEGIES
from reactsim.exchange import Order, OrderBook, Side, lob_metrics, to_currency
from reactsim.market import MarketSession, SessionConfig, run_session
from reactsim.profiler import TABLE2, profile_strategies
from reactsim.scheduler import (ORDER_A, ORDER_B, fixed_order_step, proportional_pool, proportional_step,
                                tournament_step)
from reactsim.schedules import Assignment, ScheduleConfig, generate_symmetric_schedule, theoretical_equilibrium

from test_agents import no_loss_violations
from test_scheduler import reference_tournament
from test_schedules import brute_force_equilibrium

pytestmark = pytest.mark.acceptance

REPS = 100
ESCALATED_REPS = 500
ALPHA = 0.05
SEED = 0
STATELESS = ("GVWY", "SHVR", "ZIC")
COMPETITORS = ("GVWY", "SHVR", "ZIC", "ZIP")


def balanced(a, b, **kw):
    return ex.balanced_config((a, b), SessionConfig(**kw))


def run(config, reps=REPS, groups=None):
    return ex.run_experiment(config, reps, SEED, groups=groups)


def fmt(summary, a, b):
    t = summary.compare(a, b)
    return f"{a} {summary.mean(a) / 100:.3f} vs {b} {summary.mean(b) / 100:.3f}, p={t.p:.3g}"


def beats(summary, a, b, significant=True):
    t = summary.compare(a, b)
    return summary.mean(a) > summary.mean(b) and (t.p < ALPHA or not significant)


# ---------------------------------------------------------------- 1-3: exact and Monte-Carlo checks

def test_c01_book_math(criterion):
    book = OrderBook()
    for tid, side, price in [("b1", Side.BID, 97), ("b2", Side.BID, 97), ("b3", Side.BID, 95),
                             ("s1", Side.ASK, 99), ("s2", Side.ASK, 101)]:
        book.submit(Order(tid, side, price))
    m = lob_metrics(book)
    checks = [to_currency(m.spread) == 0.02, to_currency(m.midprice) == 0.98,
              round(to_currency(m.microprice), 3) == 0.977]
    ask_book, bid_book = OrderBook(), OrderBook()
    for b in (ask_book, bid_book):
        for tid, side, price in [("b1", Side.BID, 97), ("s1", Side.ASK, 99)]:
            b.submit(Order(tid, side, price))
    checks.append(ask_book.submit(Order("s9", Side.ASK, 96))[-1].payload.price == 97)
    checks.append(bid_book.submit(Order("b9", Side.BID, 99))[-1].payload.price == 99)
    ok = criterion(1, "book math", all(checks), f"microprice {to_currency(m.microprice):.3f}")
    assert ok


def test_c02_equilibrium(criterion):
    eq = theoretical_equilibrium(generate_symmetric_schedule(ScheduleConfig()))
    ok = (eq.p0_low, eq.p0_high, eq.q0) == (90, 110, 5)
    rng = random.Random(SEED)
    mismatches = 0
    for _ in range(2000):
        n = rng.randint(1, 6)
        buy = [rng.randint(1, 300) for _ in range(n)]
        sell = [rng.randint(1, 300) for _ in range(n)]
        got = theoretical_equilibrium([Assignment(f"B{i}", Side.BID, p) for i, p in enumerate(buy)]
                                      + [Assignment(f"S{i}", Side.ASK, p) for i, p in enumerate(sell)])
        mismatches += (got.p0_low, got.p0_high, got.q0) != brute_force_equilibrium(buy, sell)
    ok = criterion(2, "equilibrium", ok and mismatches == 0,
                   f"P0=[{eq.p0_low / 100:.2f}, {eq.p0_high / 100:.2f}] Q0={eq.q0}, oracle mismatches {mismatches}")
    assert ok


def test_c03_scheduler_fidelity(criterion):
    buyers = [f"B{i:02d}" for i in range(10)]
    sellers = [f"S{i:02d}" for i in range(10)]
    alternates = True
    for initial in (ORDER_A, ORDER_B):
        for step in range(330):
            seq = fixed_order_step(buyers, sellers, step, initial)
            sellers_lead = (initial == ORDER_A) == (step % 2 == 0)
            expected = [x for b, s in zip(buyers, sellers) for x in ((s, b) if sellers_lead else (b, s))]
            alternates &= seq == expected
    traders = ["r1", "r2", "r3", "r4"]
    ranks = {t: i + 1 for i, t in enumerate(traders)}
    n = 100_000
    rng_a, rng_b = random.Random(1), random.Random(2)
    ours = collections.Counter(tuple(tournament_step(traders, ranks, rng_a)) for _ in range(n))
    ref = collections.Counter(tuple(reference_tournament(traders, ranks, rng_b)) for _ in range(n))
    worst = max(abs(ours[o] - ref[o]) / n for o in set(ours) | set(ref))
    pool_ok = sorted(proportional_pool({"A": 1, "B": 2})) == ["A", "A", "B"]
    rng = random.Random(3)
    counts = collections.Counter()
    times = {"GVWY": TABLE2["GVWY"], "AA": TABLE2["AA"]}
    for _ in range(100_000):
        counts.update(proportional_step(proportional_pool(times, rng), rng))
    ratio = counts["GVWY"] / counts["AA"]
    ok = criterion(3, "scheduler fidelity", alternates and worst < 0.01 and pool_ok and abs(ratio - 2.26) <= 0.05,
                   f"tournament max freq gap {worst:.4f}, GVWY:AA actions {ratio:.3f}")
    assert ok


# ---------------------------------------------------------------- 4-7: competitive experiments

def test_c04_baseline_dominance(criterion):
    parts, ok = [], True
    for other in COMPETITORS:
        s = run(balanced("AA", other))
        need_sig = other in ("SHVR", "ZIC")
        won = beats(s, "AA", other, significant=need_sig)
        ok &= won
        parts.append(f"{'ok' if won else 'NO'} {fmt(s, 'AA', other)}")
    ok = criterion(4, "AA dominance at R=1", ok, "; ".join(parts))
    assert ok


def test_c05_inversion_point(criterion):
    sweep = ex.sensitivity_sweep(("AA", "SHVR"), (1, 1.25, 1.5, 2, 4), repetitions=REPS, master_seed=SEED)
    inv = sweep.inversion_point()
    parts = [f"R={p.r:g}: {(p.mean_aa - p.mean_other) / 100:+.3f}" for p in sweep.points]
    slow_ok = True
    for other in COMPETITORS:
        point = ex.sensitivity_sweep(("AA", other), (40,), repetitions=REPS, master_seed=SEED).points[0]
        below = point.mean_aa < point.mean_other
        slow_ok &= below
        parts.append(f"R=40 vs {other}: {(point.mean_aa - point.mean_other) / 100:+.3f}")
    ok = criterion(5, "inversion point", inv is not None and inv <= 2 and slow_ok,
                   f"inversion at {inv}; AA-SHVR " + ", ".join(parts))
    assert ok


def _significant_win(config, a, b):
    """``a`` beats ``b`` significantly at 100 reps, else at the escalated count."""
    s = run(config)
    if beats(s, a, b):
        return True, REPS, s
    s = run(config, ESCALATED_REPS)
    return beats(s, a, b), ESCALATED_REPS, s


def test_c06_headline(criterion):
    prop_ok, prop_n, prop = _significant_win(
        balanced("AA", "SHVR", selection="proportional", reaction_times=TABLE2), "SHVR", "AA")
    rand_ok, rand_n, rand = _significant_win(balanced("AA", "SHVR"), "AA", "SHVR")
    ok = criterion(6, "AA:SHVR with published times", prop_ok and rand_ok,
                   f"proportional ({prop_n} reps) {fmt(prop, 'SHVR', 'AA')}; "
                   f"random ({rand_n} reps) {fmt(rand, 'AA', 'SHVR')}")
    assert ok


def test_c07_zip_shvr(criterion):
    prop = run(balanced("ZIP", "SHVR", selection="proportional", reaction_times=TABLE2))
    rand = run(balanced("ZIP", "SHVR"))
    ok = criterion(7, "ZIP:SHVR", prop.mean("SHVR") >= prop.mean("ZIP") and rand.mean("ZIP") > rand.mean("SHVR"),
                   f"proportional {fmt(prop, 'SHVR', 'ZIP')}; random {fmt(rand, 'ZIP', 'SHVR')}")
    assert ok


# ---------------------------------------------------------------- 8-9: ordering effects

def _positions(strategy, selection):
    groups = {**ex.position_groups(10), **ex.rank_half_groups(10),
              "first": ex.trader_group(["B00", "S00"]), "last": ex.trader_group(["B09", "S09"])}
    return run(SessionConfig(mix=((strategy, 10),), selection=selection), groups=groups)


def test_c08_fixed_order(criterion):
    parts, ok = [], True
    z = _positions("ZIP", "fixed")
    zip_ok = beats(z, "B0", "B9") and beats(z, "S9", "S0")
    parts.append(f"ZIP {fmt(z, 'B0', 'B9')}, {fmt(z, 'S9', 'S0')}")
    a = _positions("AA", "fixed")
    aa_ok = beats(a, "last", "first")
    parts.append(f"AA {fmt(a, 'last', 'first')}")
    ok = zip_ok and aa_ok
    for strategy in STATELESS:
        s = _positions(strategy, "fixed")
        flat = all(s.compare(x, y).p >= ALPHA for x, y in (("B0", "B9"), ("S0", "S9")))
        ok &= flat
        parts.append(f"{strategy} p(B)={s.compare('B0', 'B9').p:.3g} p(S)={s.compare('S0', 'S9').p:.3g}")
    ok = criterion(8, "fixed-order effects", ok, "; ".join(parts))
    assert ok


def test_c09_tournament_aa(criterion):
    s = _positions("AA", "rank")
    ok = (beats(s, "fast_buyers", "slow_buyers") and beats(s, "slow_sellers", "fast_sellers")
          and s.mean("sellers") > s.mean("buyers"))
    ok = criterion(9, "tournament AA asymmetry", ok,
                   f"{fmt(s, 'fast_buyers', 'slow_buyers')}; {fmt(s, 'slow_sellers', 'fast_sellers')}; "
                   f"{fmt(s, 'sellers', 'buyers')}")
    assert ok


# ---------------------------------------------------------------- 10-11: profiling and invariants

def test_c10_profiling(criterion):
    runs = [profile_strategies(calls=100_000, seed=k) for k in range(2)]
    ok, parts = True, []
    for k, report in enumerate(runs):
        t = report.reaction_times()
        slowest_stateless = max(t[s] for s in STATELESS)
        stateful_ok = min(t["ZIP"], t["AA"]) > slowest_stateless
        band_ok = 1.0 <= t["AA"] / t["ZIP"] <= 1.5
        ok &= stateful_ok and band_ok
        parts.append(f"run {k}: " + " ".join(f"{s}={v:.2f}us" for s, v in t.items())
                     + f" AA/ZIP={t['AA'] / t['ZIP']:.2f}")
    r0, r1 = (r.ratios("SHVR") for r in runs)
    drift = max(abs(r1[s] / r0[s] - 1) for s in r0)
    ok &= drift <= 0.15
    parts.append(f"max ratio drift {drift:.1%}")
    ok = criterion(10, "profiling properties", ok, "; ".join(parts))
    assert ok


def _checked_session(config):
    session = MarketSession(config)
    act = session.act
    crossed = 0

    def checked(tid, step):
        nonlocal crossed
        act(tid, step)
        bb, ba = session.book.best_bid, session.book.best_ask
        crossed += bb is not None and ba is not None and bb >= ba

    session.act = checked
    return session.run(), crossed


def test_c11_invariants(criterion):
    no_loss = no_loss_violations(10_000, seed=SEED)
    surplus = crossed = nondeterministic = 0
    names = sorted(STRATEGIES)
    mixes = [((s, 10),) for s in names] + [((a, 5), (b, 5)) for a, b in itertools.combinations(names, 2)]
    for i, mix in enumerate(mixes):
        for selection in ("random", "fixed", "rank", "proportional"):
            times = {s: TABLE2[s] for s, _ in mix} if selection == "proportional" else None
            cfg = SessionConfig(mix=mix, selection=selection, reaction_times=times, seed=i)
            result, c = _checked_session(cfg)
            crossed += c
            surplus += result.total_profit() != result.surplus_from_trades()
            surplus += any(not b >= t.price >= s for t, (b, s) in zip(result.trades, result.trade_limits))
            nondeterministic += run_session(cfg) != result
    ok = criterion(11, "invariants", no_loss == surplus == crossed == nondeterministic == 0,
                   f"no-loss {no_loss}, surplus {surplus}, crossed {crossed}, nondeterministic {nondeterministic} "
                   f"over {len(mixes) * 4} sessions and 10^4 quote states")
    assert ok
