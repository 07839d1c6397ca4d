"""INI-style experiment configuration.

Sections and keys (all optional; defaults give the standard 10v10 market)::

    [market]
    n = 10                   # traders per side
    price_low = 0.10         # currency
    price_high = 1.90
    session_length = 330
    replenish_interval = 30
    min_price = 0.01
    max_price = 2.00

    [traders]
    AA = 5                   # strategy = traders per side
    SHVR = 5

    [selection]
    model = random           # random | fixed | rank | proportional
    times = table2           # table2 | CSV path | inline "AA:9.5, SHVR:6.9"
    ranks = PATH or inline   # rank model only; default splits fast/slow halves

    [experiment]
    name = aa_shvr
    reps = 100
    seed = 0
    workers = 1
"""
from __future__ import annotations

import configparser
import csv
import os
from dataclasses import dataclass, field
from typing import Optional

from .agents import STRATEGIES
from .exchange import to_ticks
from .market import SELECTION_KINDS, SessionConfig, SessionConfigError
from .profiler import TABLE2, ProfilerError, read_reaction_times
from .schedules import ScheduleConfig, ScheduleError

SECTIONS = ("market", "traders", "selection", "experiment")
MARKET_KEYS = {"n", "price_low", "price_high", "session_length", "replenish_interval", "min_price", "max_price"}
SELECTION_KEYS = {"model", "times", "ranks"}
EXPERIMENT_KEYS = {"name", "reps", "seed", "workers"}


class ConfigError(ValueError):
    """Malformed or inconsistent configuration; the message names the key."""


@dataclass
class ExperimentConfig:
    session: SessionConfig = field(default_factory=SessionConfig)
    repetitions: int = 100
    master_seed: int = 0
    workers: int = 1
    name: str = "default"


def _int(section: str, key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected an integer, got {value!r}") from None


def _price(section: str, key: str, value: str) -> int:
    try:
        return to_ticks(value)
    except (ValueError, ArithmeticError):
        raise ConfigError(f"[{section}] {key}: expected a price, got {value!r}") from None


def parse_table(text: str, base_dir: str = ".", section: str = "selection", key: str = "times") -> dict:
    """Per-strategy or per-trader values from ``table2``, a CSV path or inline pairs."""
    text = text.strip()
    if text.lower() == "table2":
        return dict(TABLE2)
    path = text if os.path.isabs(text) else os.path.join(base_dir, text)
    if not os.path.exists(path) and (":" in text or "=" in text):
        out = {}
        for item in text.split(","):
            item = item.strip()
            if not item:
                continue
            name, sep, value = item.replace("=", ":").partition(":")
            if not sep:
                raise ConfigError(f"[{section}] {key}: bad entry {item!r}")
            try:
                out[_table_key(name)] = float(value)
            except ValueError:
                raise ConfigError(f"[{section}] {key}: bad value in {item!r}") from None
        return out
    if not os.path.exists(path):
        raise ConfigError(f"[{section}] {key}: file not found: {path}")
    try:
        if key == "times":
            table = read_reaction_times(path)
        else:
            table = _read_value_csv(path)
    except (ProfilerError, ValueError) as exc:
        raise ConfigError(f"[{section}] {key}: {exc}") from None
    return {_table_key(k): v for k, v in table.items()}


def _table_key(name: str) -> str:
    name = name.strip()
    return name.upper() if name.upper() in STRATEGIES else name


def _read_value_csv(path: str) -> dict:
    out = {}
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                out[row[0].strip()] = float(row[1])
            except (IndexError, ValueError):
                if out:
                    raise ValueError(f"bad row {row}") from None
    return out


def parse_config(text: str, base_dir: str = ".") -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keep strategy tokens as written
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"unknown section [{section}]")

    def items(section):
        return dict(parser.items(section)) if parser.has_section(section) else {}

    market = items("market")
    _check_keys("market", market, MARKET_KEYS)
    sched_kwargs = {}
    for key in ("n", "session_length", "replenish_interval"):
        if key in market:
            sched_kwargs[key] = _int("market", key, market[key])
    for key in ("price_low", "price_high"):
        if key in market:
            sched_kwargs[key] = _price("market", key, market[key])
    try:
        schedule = ScheduleConfig(**sched_kwargs)
    except ScheduleError as exc:
        raise ConfigError(f"[market] {exc}") from None
    session_kwargs = {}
    for key in ("min_price", "max_price"):
        if key in market:
            session_kwargs[key] = _price("market", key, market[key])

    traders = items("traders")
    mix = []
    for token, count in traders.items():
        if token.upper() not in STRATEGIES:
            raise ConfigError(f"[traders] {token}: unknown strategy (expected one of {', '.join(STRATEGIES)})")
        mix.append((token.upper(), _int("traders", token, count)))
    if not mix:
        mix = [("ZIC", schedule.n)]
    total = sum(c for _, c in mix)
    if total != schedule.n:
        raise ConfigError(f"[traders] counts sum to {total} per side but [market] n = {schedule.n}")

    selection = items("selection")
    _check_keys("selection", selection, SELECTION_KEYS)
    model = selection.get("model", "random").strip().lower()
    if model not in SELECTION_KINDS:
        raise ConfigError(f"[selection] model: unknown model {model!r} (expected one of {', '.join(SELECTION_KINDS)})")
    times = parse_table(selection["times"], base_dir) if "times" in selection else None
    ranks = parse_table(selection["ranks"], base_dir, key="ranks") if "ranks" in selection else None
    if model == "proportional" and not times:
        raise ConfigError("[selection] times: proportional selection needs reaction times; "
                          "supply a times CSV or times = table2")

    experiment = items("experiment")
    _check_keys("experiment", experiment, EXPERIMENT_KEYS)
    reps = _int("experiment", "reps", experiment.get("reps", "100"))
    if reps < 2:
        raise ConfigError(f"[experiment] reps: need at least 2, got {reps}")
    seed = _int("experiment", "seed", experiment.get("seed", "0"))
    workers = _int("experiment", "workers", experiment.get("workers", "1"))

    try:
        session = SessionConfig(schedule=schedule, mix=tuple(mix), selection=model, reaction_times=times,
                                ranks=ranks, seed=seed, **session_kwargs)
    except (SessionConfigError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return ExperimentConfig(session, reps, seed, workers, experiment.get("name", "default"))


def load_config(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), os.path.dirname(os.path.abspath(path)))


def _check_keys(section: str, found: dict, allowed: set) -> None:
    for key in found:
        if key not in allowed:
            raise ConfigError(f"[{section}] {key}: unknown key")


def with_times(config: SessionConfig, times: Optional[dict]) -> SessionConfig:
    if times is None:
        return config
    return config.replace(reaction_times=times)
