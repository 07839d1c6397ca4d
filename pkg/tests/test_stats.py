import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sst

from reactsim.stats import InsufficientSamplesError, confidence_interval, confidence_interval_95, two_sample_t_test


def test_identical_groups():
    r = two_sample_t_test([1, 2, 3], [1, 2, 3])
    assert r.t == 0 and r.p == 1 and r.df == 4


def test_constant_equal_groups():
    assert two_sample_t_test([5, 5], [5, 5]).p == 1.0


def test_constant_unequal_groups():
    r = two_sample_t_test([0, 0, 0], [1, 1, 1])
    assert r.p == 0.0 and r.t == -math.inf and r.significant()


def test_jittered_groups_significant():
    eps = 1e-6
    r = two_sample_t_test([0, eps, 0, -eps], [1, 1 + eps, 1, 1 - eps])
    assert r.p < 1e-4


def test_textbook_value():
    # t = -3, df = 8, two-tailed p from the t-table is about 0.0171
    r = two_sample_t_test([1, 2, 3, 4, 5], [4, 5, 6, 7, 8])
    assert r.t == pytest.approx(-3.0)
    assert r.p == pytest.approx(0.01707, abs=1e-4)


def test_too_few_samples():
    with pytest.raises(InsufficientSamplesError):
        two_sample_t_test([1], [1, 2])
    with pytest.raises(InsufficientSamplesError):
        confidence_interval_95([1])


def test_ci_examples():
    assert confidence_interval_95([3, 3, 3]) == (3, 0)
    mean, half = confidence_interval_95([0, 2])
    assert mean == 1 and half == pytest.approx(12.706, abs=1e-3)


def test_ci_normal_limit():
    n = 10_000
    xs = [(-1) ** i for i in range(n)]  # unit variance (almost)
    _, half = confidence_interval_95(xs)
    assert half == pytest.approx(1.96 / math.sqrt(n), rel=1e-3)


def test_ci_levels_nest():
    xs = [1.0, 4.0, 2.0, 8.0]
    assert confidence_interval(xs, 0.9)[1] < confidence_interval(xs, 0.99)[1]


samples = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=2, max_size=30)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
@settings(max_examples=200, deadline=None)
@given(samples, samples)
def test_matches_scipy(a, b):
    ours = two_sample_t_test(a, b)
    if not math.isfinite(ours.t) or ours.p in (0.0, 1.0):
        return
    ref = sst.ttest_ind(a, b, equal_var=True)
    assert ours.t == pytest.approx(ref.statistic, rel=1e-6, abs=1e-9)
    assert ours.p == pytest.approx(ref.pvalue, rel=1e-6, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(samples, samples)
def test_symmetry(a, b):
    r1, r2 = two_sample_t_test(a, b), two_sample_t_test(b, a)
    assert r1.p == pytest.approx(r2.p)
    assert r1.t == -r2.t or (math.isnan(r1.t) and math.isnan(r2.t))
