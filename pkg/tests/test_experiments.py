import pytest

from reactsim import experiments as ex
from reactsim.market import SessionConfig
from reactsim.schedules import ScheduleConfig

SMALL = ScheduleConfig(n=4, session_length=60, replenish_interval=30)


def small(mix=(("ZIC", 2), ("GVWY", 2)), **kw):
    return SessionConfig(schedule=SMALL, mix=mix, **kw)


def test_seed_derivation_is_counter_based():
    a = ex.derive_seeds(7, 5)
    assert a == ex.derive_seeds(7, 5)
    assert ex.derive_seeds(7, 8)[:5] == a
    assert len(set(a)) == 5
    assert ex.derive_seeds(8, 5) != a


def test_run_experiment_summary():
    s = ex.run_experiment(small(), repetitions=6, master_seed=1)
    assert s.repetitions == 6 and set(s.groups()) == {"GVWY", "ZIC"}
    st = s.stats("ZIC")
    assert st.n == 6 and st.ci_half >= 0
    assert st.mean == pytest.approx(s.mean("ZIC"))
    assert 0 <= s.compare("ZIC", "GVWY").p <= 1


def test_workers_do_not_change_results():
    a = ex.run_experiment(small(), repetitions=4, master_seed=3)
    b = ex.run_experiment(small(), repetitions=4, master_seed=3, workers=2)
    assert a.samples == b.samples


def test_summary_is_permutation_invariant():
    s = ex.run_experiment(small(), repetitions=5, master_seed=2)
    xs = s.samples["ZIC"]
    s.samples["ZIC"] = list(reversed(xs))
    assert s.stats("ZIC").mean == pytest.approx(sum(xs) / len(xs))


def test_repetitions_must_be_at_least_two():
    with pytest.raises(ex.ExperimentError):
        ex.run_experiment(small(), repetitions=1)


def test_group_helpers():
    s = ex.run_experiment(small(mix=(("ZIC", 4),), selection="fixed"), repetitions=3,
                          groups={**ex.position_groups(4), **ex.rank_half_groups(4)}, keep_sessions=True)
    assert {"B0", "S3", "fast_buyers", "slow_sellers", "buyers", "sellers"} <= set(s.groups())
    r = s.sessions[0]
    assert s.samples["B0"][0] == r.profits["B00"]
    assert s.samples["buyers"][0] == pytest.approx(sum(r.profits[f"B{i:02d}"] for i in range(4)) / 4)


def test_missing_strategy_group_errors():
    with pytest.raises(ex.ExperimentError):
        ex.run_experiment(small(), repetitions=2, groups={"AA": ex.strategy_group("AA")})


def test_balanced_config():
    cfg = ex.balanced_config(("aa", "shvr"))
    assert cfg.mix == (("AA", 5), ("SHVR", 5))
    with pytest.raises(ex.ExperimentError):
        ex.balanced_config(("AA", "AA"))
    with pytest.raises(ex.ExperimentError):
        ex.balanced_config(("AA", "SHVR"), SessionConfig(schedule=ScheduleConfig(n=3), mix=(("ZIC", 3),)))


def test_sweep_shape_and_validation():
    base = small(mix=(("ZIC", 4),))
    res = ex.sensitivity_sweep(("AA", "SHVR"), (1, 2), base=base, repetitions=3)
    assert [p.r for p in res.points] == [1.0, 2.0]
    assert res.pair == ("AA", "SHVR")
    assert res.points[1].summary.config.reaction_times == {"AA": 2.0, "SHVR": 1.0}
    with pytest.raises(ex.ExperimentError):
        ex.sensitivity_sweep(("AA", "SHVR"), (0.5,), base=base, repetitions=3)
    with pytest.raises(ex.ExperimentError):
        ex.sensitivity_sweep(("AA", "SHVR"), (41,), base=base, repetitions=3)


def test_inversion_point():
    def pt(r, a, b):
        return ex.SweepPoint(r, None, a, b, 0, 0, None)
    assert ex.SweepResult(("AA", "X"), [pt(1, 5, 4), pt(2, 3, 4)]).inversion_point() == 2
    assert ex.SweepResult(("AA", "X"), [pt(1, 5, 4)]).inversion_point() is None
