"""Two-sample Student t-test and t-based confidence intervals."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from scipy import stats as _st


class InsufficientSamplesError(ValueError):
    pass


@dataclass(frozen=True)
class TTestResult:
    t: float
    p: float
    df: int

    def significant(self, alpha: float = 0.05) -> bool:
        return self.p < alpha


def _mean_var(xs: Sequence[float]):
    n = len(xs)
    m = math.fsum(xs) / n
    var = math.fsum((x - m) ** 2 for x in xs) / (n - 1)
    return n, m, var


def two_sample_t_test(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Two-tailed pooled-variance t-test.

    Zero pooled variance gives ``p = 1`` for equal means and ``p = 0`` with
    an infinite ``t`` otherwise.
    """
    if len(a) < 2 or len(b) < 2:
        raise InsufficientSamplesError(f"need at least 2 samples per group, got {len(a)} and {len(b)}")
    na, ma, va = _mean_var(a)
    nb, mb, vb = _mean_var(b)
    df = na + nb - 2
    pooled = ((na - 1) * va + (nb - 1) * vb) / df
    diff = ma - mb
    se = math.sqrt(pooled * (1.0 / na + 1.0 / nb))
    if se == 0.0:
        if diff == 0.0:
            return TTestResult(0.0, 1.0, df)
        return TTestResult(math.copysign(math.inf, diff), 0.0, df)
    t = diff / se
    p = 2.0 * float(_st.t.sf(abs(t), df))
    return TTestResult(t, min(1.0, p), df)


def confidence_interval_95(samples: Sequence[float]) -> tuple:
    """``(mean, half_width)`` with half width ``t_{0.975, n-1} * s / sqrt(n)``."""
    return confidence_interval(samples, 0.95)


def confidence_interval(samples: Sequence[float], level: float = 0.95) -> tuple:
    if len(samples) < 2:
        raise InsufficientSamplesError(f"a confidence interval needs at least 2 samples, got {len(samples)}")
    n, m, var = _mean_var(samples)
    q = float(_st.t.ppf(0.5 + level / 2.0, n - 1))
    return m, q * math.sqrt(var / n)
