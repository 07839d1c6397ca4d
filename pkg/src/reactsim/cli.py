"""Command-line entry point: ``reactsim {run,sweep,profile,replay}``."""
from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from typing import Optional, Sequence

from . import experiments as ex
from .config import ConfigError, ExperimentConfig, load_config, parse_table
from .exchange import format_currency, write_trade_tape
from .market import MarketSession, SessionConfigError
from .profiler import ProfilerError, format_report, profile_strategies

SUMMARY_HEADER = ["condition", "strategy", "mean", "ci_half", "n"]
SESSIONS_HEADER = ["condition", "rep", "seed", "strategy", "total_profit", "traders"]
TTEST_HEADER = ["condition", "group_a", "group_b", "t", "p"]
SWEEP_HEADER = ["R", "mean_AA", "mean_other", "ci_AA", "ci_other", "p"]
QUOTES_HEADER = ["step", "trader_id", "side", "price"]


class OutputExistsError(RuntimeError):
    pass


def _money(ticks: float) -> str:
    return f"{ticks / 100:.2f}"


def _p(value: float) -> str:
    return f"{value:.6g}"


class OutputDir:
    """Collects rendered files and writes each one via a temp file and rename."""

    def __init__(self, path: str, force: bool):
        self.path = path
        self.force = force
        self.files: dict = {}

    def add(self, name: str, header: Sequence[str], rows) -> None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        self.files[name] = buf.getvalue()

    def add_text(self, name: str, text: str) -> None:
        self.files[name] = text

    def check(self, names: Sequence[str]) -> None:
        if self.force:
            return
        clash = [n for n in names if os.path.exists(os.path.join(self.path, n))]
        if clash:
            raise OutputExistsError(f"refusing to overwrite {', '.join(clash)} in {self.path} (use --force)")

    def commit(self) -> list:
        os.makedirs(self.path, exist_ok=True)
        written = []
        for name, text in self.files.items():
            final = os.path.join(self.path, name)
            tmp = final + ".tmp"
            with open(tmp, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.replace(tmp, final)
            written.append(final)
        return written


# ---------------------------------------------------------------- experiment families

def experiment_groups(cfg: ExperimentConfig) -> tuple:
    """Groups to summarise and the pairs to test for a configured experiment."""
    session = cfg.session
    groups = ex.strategy_groups(session)
    strategies = session.strategies()
    pairs = [(a, b) for i, a in enumerate(strategies) for b in strategies[i + 1:]]
    n = session.schedule.n
    if session.selection == "fixed":
        groups.update(ex.position_groups(n))
        pairs += [("B0", f"B{n - 1}"), ("S0", f"S{n - 1}")]
    elif session.selection == "rank" and session.ranks is None:
        groups.update(ex.rank_half_groups(n))
        pairs += [("fast_buyers", "slow_buyers"), ("slow_sellers", "fast_sellers"), ("sellers", "buyers")]
    return groups, pairs


def render_run(cfg: ExperimentConfig, summary: ex.ExperimentSummary, pairs, out: OutputDir) -> None:
    name = cfg.name
    rows = []
    for g in summary.groups():
        st = summary.stats(g)
        rows.append([name, g, _money(st.mean), _money(st.ci_half), st.n])
    out.add("summary.csv", SUMMARY_HEADER, rows)
    session_rows = []
    for rep, (seed, result) in enumerate(zip(summary.seeds, summary.sessions)):
        counts = result.strategy_counts()
        for strategy, total in sorted(result.strategy_totals().items()):
            session_rows.append([name, rep, seed, strategy, _money(total), counts[strategy]])
    out.add("sessions.csv", SESSIONS_HEADER, session_rows)
    test_rows = []
    for a, b in pairs:
        t = summary.compare(a, b)
        test_rows.append([name, a, b, f"{t.t:.4f}", _p(t.p)])
    out.add("ttests.csv", TTEST_HEADER, test_rows)


def summary_from_sessions_csv(text: str) -> dict:
    """Re-aggregate a sessions.csv into ``{(condition, strategy): (mean, ci_half, n)}`` in ticks."""
    from .exchange import to_ticks
    from .stats import confidence_interval_95
    samples: dict = {}
    for row in csv.DictReader(io.StringIO(text)):
        key = (row["condition"], row["strategy"])
        samples.setdefault(key, []).append(to_ticks(row["total_profit"]) / int(row["traders"]))
    out = {}
    for key, xs in samples.items():
        mean, half = confidence_interval_95(xs)
        out[key] = (mean, half, len(xs))
    return out


def cmd_run(args) -> int:
    cfg = _load(args)
    out = OutputDir(args.out, args.force)
    out.check(["summary.csv", "sessions.csv", "ttests.csv"])
    groups, pairs = experiment_groups(cfg)
    summary = ex.run_experiment(cfg.session, cfg.repetitions, cfg.master_seed, groups=groups,
                                keep_sessions=True, workers=cfg.workers)
    render_run(cfg, summary, pairs, out)
    for path in out.commit():
        print(path)
    for g in summary.groups():
        st = summary.stats(g)
        print(f"{g:<12} mean {format_currency(round(st.mean))}  +/- {st.ci_half / 100:.3f}  (n={st.n})")
    return 0


def cmd_sweep(args) -> int:
    cfg = _load(args)
    pair = _parse_pair(args.pair)
    r_values = _parse_list(args.R)
    out = OutputDir(args.out, args.force)
    out.check(["sweep.csv"])
    result = ex.sensitivity_sweep(pair, r_values, base=cfg.session, repetitions=cfg.repetitions,
                                  master_seed=cfg.master_seed, workers=cfg.workers)
    rows = [[f"{p.r:g}", _money(p.mean_aa), _money(p.mean_other), _money(p.ci_aa), _money(p.ci_other),
             _p(p.test.p)] for p in result.points]
    out.add("sweep.csv", SWEEP_HEADER, rows)
    for path in out.commit():
        print(path)
    inv = result.inversion_point()
    print(f"{pair[0]} vs {pair[1]}: " + (f"first R with {pair[0]} below: {inv:g}" if inv is not None
                                         else "no inversion in the swept range"))
    return 0


def cmd_profile(args) -> int:
    out = OutputDir(args.out, args.force)
    out.check(["profile.csv"])
    report = profile_strategies(calls=args.calls, seed=args.seed or 0)
    ratios = report.ratios("SHVR") if "SHVR" in report.rows else {}
    rows = [[r.strategy, f"{r.get_order_us:.4f}", f"{r.respond_us:.4f}", f"{r.combined_us:.4f}", r.calls,
             f"{ratios.get(r.strategy, float('nan')):.4f}"] for r in report.rows.values()]
    out.add("profile.csv", ["strategy", "get_order_us", "respond_us", "combined_us", "calls", "ratio_SHVR"], rows)
    for path in out.commit():
        print(path)
    print(format_report(report))
    return 0


def cmd_replay(args) -> int:
    cfg = _load(args)
    out = OutputDir(args.out, args.force)
    out.check(["trades.csv", "quotes.csv"])
    result = MarketSession(cfg.session.replace(seed=args.seed if args.seed is not None else cfg.master_seed)).run()
    buf = io.StringIO()
    write_trade_tape(result.trades, buf)
    out.add_text("trades.csv", buf.getvalue())
    out.add("quotes.csv", QUOTES_HEADER,
            [[q.step, q.trader_id, q.side.value, format_currency(q.price)] for q in result.quotes])
    for path in out.commit():
        print(path)
    print(f"{len(result.trades)} trades, {len(result.quotes)} quotes")
    return 0


# ---------------------------------------------------------------- plumbing

def _parse_pair(text: str) -> tuple:
    parts = [p.strip().upper() for p in text.split(":")]
    if len(parts) != 2 or not all(parts):
        raise ConfigError(f"--pair: expected X:Y, got {text!r}")
    return tuple(parts)


def _parse_list(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"--R: expected a comma-separated list of numbers, got {text!r}") from None


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg.master_seed = args.seed
        cfg.session = cfg.session.replace(seed=args.seed)
    if args.reps is not None:
        if args.reps < 2:
            raise ConfigError(f"--reps: need at least 2, got {args.reps}")
        cfg.repetitions = args.reps
    if getattr(args, "workers", None):
        cfg.workers = args.workers
    if args.times:
        cfg.session = cfg.session.replace(reaction_times=parse_table(args.times, os.getcwd()))
    if getattr(args, "pair", None) and args.command in ("run", "replay") and not args.config:
        cfg.session = ex.balanced_config(_parse_pair(args.pair), cfg.session)
    if getattr(args, "selection", None):
        try:
            cfg.session = cfg.session.replace(selection=args.selection)
        except SessionConfigError as exc:
            raise ConfigError(f"--selection: {exc}") from None
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reactsim", description="Continuous double auction reaction-time experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, reps=True):
        p.add_argument("--config", help="INI experiment configuration")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--force", action="store_true", help="overwrite existing outputs")
        if reps:
            p.add_argument("--reps", type=int, help="repetitions override")
            p.add_argument("--times", help="reaction times: table2 or a CSV path")
            p.add_argument("--workers", type=int, help="worker processes")
            p.add_argument("--selection", choices=("random", "fixed", "rank", "proportional"),
                           help="selection model override")

    p = sub.add_parser("run", help="replicated experiment: summary.csv, sessions.csv, ttests.csv")
    common(p)
    p.add_argument("--pair", help="balanced X:Y mix when no config is given")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="relative reaction-time sweep: sweep.csv")
    common(p)
    p.add_argument("--pair", default="AA:SHVR", help="slowed strategy and competitor (default AA:SHVR)")
    p.add_argument("--R", default="1,2,4,8,16,40", help="comma-separated relative reaction times")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("profile", help="per-strategy compute times: profile.csv")
    common(p, reps=False)
    p.add_argument("--calls", type=int, default=1_000_000, help="timed get_order calls per strategy")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("replay", help="one session's trade and quote tapes")
    common(p)
    p.add_argument("--pair", help="balanced X:Y mix when no config is given")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SessionConfigError, ex.ExperimentError, ProfilerError, OutputExistsError) as exc:
        print(f"reactsim: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"reactsim: I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
