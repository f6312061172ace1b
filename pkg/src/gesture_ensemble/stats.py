"""One-sample t-test with Student-t tail probabilities from the incomplete beta function."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateSampleError

_CF_EPS = 1e-16
_CF_TINY = 1e-300
_CF_MAX_ITER = 500


def _beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = _CF_TINY if abs(d) < _CF_TINY else d
        c = 1.0 + aa / c
        c = _CF_TINY if abs(c) < _CF_TINY else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = _CF_TINY if abs(d) < _CF_TINY else d
        c = 1.0 + aa / c
        c = _CF_TINY if abs(c) < _CF_TINY else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    # the fraction converges fast only on this side of the mean; use symmetry otherwise
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def t_tail(t: float, df: float) -> float:
    """P(T >= |t|) for Student's t with ``df`` degrees of freedom."""
    x = df / (df + t * t)
    return 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, x)


def t_cdf(t: float, df: float) -> float:
    tail = t_tail(t, df)
    return 1.0 - tail if t >= 0 else tail


def t_quantile(p: float, df: float) -> float:
    """Inverse of ``t_cdf`` by bisection."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return -t_quantile(1.0 - p, df)
    lo, hi = 0.0, 1.0
    while t_cdf(hi, df) < p:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if t_cdf(mid, df) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class TTestReport:
    n: int
    mean: float
    sd: float
    sem: float
    mu: float
    t: float
    df: int
    p_one_sided: float  # tail in the direction of the observed difference
    p_two_sided: float
    mean_difference: float
    ci95_lower: float
    ci95_upper: float

    def to_json(self) -> dict:
        return asdict(self)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")


def ttest_from_summary(mean: float, sd: float, n: int, mu: float) -> TTestReport:
    """One-sample t-test from summary statistics (sample SD, n - 1 denominator)."""
    if n < 2:
        raise ValueError("a t-test needs at least two samples")
    if sd <= 0:
        raise DegenerateSampleError("sample standard deviation is zero")
    sem = sd / math.sqrt(n)
    t = (mean - mu) / sem
    df = n - 1
    tail = t_tail(t, df)
    half_width = t_quantile(0.975, df) * sem
    diff = mean - mu
    return TTestReport(
        n=n, mean=mean, sd=sd, sem=sem, mu=mu, t=t, df=df,
        p_one_sided=tail, p_two_sided=2.0 * tail,
        mean_difference=diff, ci95_lower=diff - half_width, ci95_upper=diff + half_width,
    )


def one_sample_ttest(samples, mu: float) -> TTestReport:
    values = np.asarray(samples, dtype=np.float64)
    if values.size < 2:
        raise ValueError("a t-test needs at least two samples")
    if np.ptp(values) == 0:
        raise DegenerateSampleError("all samples are equal; the t statistic is undefined")
    return ttest_from_summary(float(values.mean()), float(values.std(ddof=1)), int(values.size), mu)
