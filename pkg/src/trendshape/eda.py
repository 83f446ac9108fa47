"""Exploratory statistics: z-scores, rolling bands, summaries, correlation,
Kolmogorov-Smirnov normality, and the augmented Dickey-Fuller decision.

Two deliberate sigma conventions coexist here: :func:`z_normalize` uses the
population standard deviation (the symbolic-discretization convention) while
:func:`descriptive_stats` reports the sample (n-1) standard deviation as
summary tables conventionally do.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .dataset import Dataset
from .errors import DegenerateSample, EmptyInput, NumericalError, WindowTooLarge


@dataclass(frozen=True)
class SummaryStats:
    count: int
    mean: float
    std: float
    min: float
    q25: float
    median: float
    q75: float
    max: float


@dataclass(frozen=True)
class RollingStats:
    """Full-window rolling means and population stds (the volatility band)."""

    window: int
    means: np.ndarray
    stds: np.ndarray


@dataclass(frozen=True)
class NormalityResult:
    statistic: float
    p_value: float
    reject_5pct: bool


@dataclass(frozen=True)
class StationarityResult:
    statistic: float
    lags_used: int
    critical_values: dict[str, float]
    reject_1pct: bool
    reject_5pct: bool
    reject_10pct: bool


@dataclass(frozen=True)
class CorrelationMatrix:
    """Pearson matrix with an explicit mask instead of silent NaNs.

    ``defined[i, j]`` is False (and ``values[i, j]`` is NaN) when either series
    is constant; the diagonal is always 1.
    """

    keywords: tuple[str, ...]
    values: np.ndarray
    defined: np.ndarray


def z_normalize(x) -> np.ndarray:
    """z_t = (x_t - mean) / population std; a constant series maps to zeros."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise EmptyInput("cannot z-normalize an empty series")
    sigma = float(x.std())
    if sigma == 0.0:
        return np.zeros_like(x)
    return (x - x.mean()) / sigma


def descriptive_stats(x) -> SummaryStats:
    """Summary-table row: sample std, quantiles by linear interpolation."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise EmptyInput("cannot summarize an empty series")
    q25, med, q75 = np.quantile(x, [0.25, 0.5, 0.75])
    std = float(x.std(ddof=1)) if x.size > 1 else 0.0
    return SummaryStats(
        count=int(x.size),
        mean=float(x.mean()),
        std=std,
        min=float(x.min()),
        q25=float(q25),
        median=float(med),
        q75=float(q75),
        max=float(x.max()),
    )


def rolling_stats(x, window: int = 13) -> RollingStats:
    """Rolling mean/std over full windows only; output length n - window + 1."""
    x = np.asarray(x, dtype=float)
    if window < 2:
        raise ValueError(f"window must be >= 2, got {window}")
    if window > x.size:
        raise WindowTooLarge(f"window {window} exceeds series length {x.size}")
    frames = np.lib.stride_tricks.sliding_window_view(x, window)
    return RollingStats(
        window=window,
        means=frames.mean(axis=1),
        stds=frames.std(axis=1),
    )


def correlation_matrix(d: Dataset) -> CorrelationMatrix:
    """Pairwise Pearson correlations over aligned series."""
    if len(d.series) < 2:
        raise ValueError("correlation matrix needs at least 2 series")
    rows = np.vstack([s.values for s in d.series])
    n = rows.shape[0]
    centered = rows - rows.mean(axis=1, keepdims=True)
    norms = np.sqrt((centered**2).sum(axis=1))
    constant = norms == 0.0

    values = np.full((n, n), np.nan)
    defined = np.zeros((n, n), dtype=bool)
    for i in range(n):
        values[i, i] = 1.0
        defined[i, i] = True
        for j in range(i + 1, n):
            if constant[i] or constant[j]:
                continue
            r = float(centered[i] @ centered[j] / (norms[i] * norms[j]))
            r = min(1.0, max(-1.0, r))
            values[i, j] = values[j, i] = r
            defined[i, j] = defined[j, i] = True
    return CorrelationMatrix(keywords=d.keywords, values=values, defined=defined)


def kolmogorov_sf(t: float) -> float:
    """Survival function of the Kolmogorov distribution.

    Uses the alternating series 2*sum (-1)^{k-1} exp(-2 k^2 t^2) for moderate
    t and the Jacobi-theta form for small t, where the direct series converges
    too slowly.
    """
    if t <= 0.0:
        return 1.0
    if t < 1.0:
        # 1 - (sqrt(2*pi)/t) * sum exp(-(2k-1)^2 pi^2 / (8 t^2))
        total = 0.0
        for k in range(1, 20):
            term = math.exp(-((2 * k - 1) ** 2) * math.pi**2 / (8.0 * t * t))
            total += term
            if term < 1e-16:
                break
        return min(1.0, max(0.0, 1.0 - math.sqrt(2.0 * math.pi) / t * total))
    total = 0.0
    for k in range(1, 200):
        term = (-1.0) ** (k - 1) * math.exp(-2.0 * k * k * t * t)
        total += term
        if abs(term) < 1e-16:
            break
    return min(1.0, max(0.0, 2.0 * total))


def ks_normality(x) -> NormalityResult:
    """KS distance between the empirical CDF and a normal fitted to the sample.

    The fitted scale is the sample (n-1) std. The p-value comes from the
    asymptotic Kolmogorov distribution at sqrt(n) * statistic; no Lilliefors
    small-sample correction is applied.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 8:
        raise ValueError(f"KS normality test needs >= 8 points, got {n}")
    mu = float(x.mean())
    sigma = float(x.std(ddof=1))
    if sigma == 0.0:
        raise DegenerateSample("constant sample: normal fit has zero scale")

    cdf = norm.cdf(np.sort((x - mu) / sigma))
    i = np.arange(1, n + 1)
    d_plus = float(np.max(i / n - cdf))
    d_minus = float(np.max(cdf - (i - 1) / n))
    stat = max(d_plus, d_minus)
    p = kolmogorov_sf(math.sqrt(n) * stat)
    return NormalityResult(statistic=stat, p_value=p, reject_5pct=p < 0.05)


# Dickey-Fuller critical values, constant-only regression, by sample size.
# Interpolated linearly in 1/n; sizes below 25 clamp to the n=25 row.
_DF_SIZES = np.array([25.0, 50.0, 100.0, 250.0, 500.0, np.inf])
_DF_CRITICAL = {
    "1%": np.array([-3.75, -3.58, -3.51, -3.46, -3.44, -3.43]),
    "5%": np.array([-3.00, -2.93, -2.89, -2.88, -2.87, -2.86]),
    "10%": np.array([-2.63, -2.60, -2.58, -2.57, -2.57, -2.57]),
}


def df_critical_values(nobs: int) -> dict[str, float]:
    u = 1.0 / np.asarray(_DF_SIZES)
    q = 1.0 / float(nobs)
    out = {}
    for level, vals in _DF_CRITICAL.items():
        # np.interp needs ascending x; 1/n reverses the size order
        out[level] = float(np.interp(q, u[::-1], vals[::-1]))
    return out


def schwert_lag(n: int) -> int:
    return int(math.floor(12.0 * (n / 100.0) ** 0.25))


def adf_test(x, max_lag: int | None = None) -> StationarityResult:
    """Augmented Dickey-Fuller test, constant-only regression.

    Regresses dx_t on [1, x_{t-1}, dx_{t-1}, ..., dx_{t-p}] and reports the
    t-ratio of the x_{t-1} coefficient. p follows Schwert's rule
    floor(12 * (T/100)^(1/4)) unless ``max_lag`` pins it. Decisions come from
    the tabulated constant-only critical values; exact p-values are out of
    scope here.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 20:
        raise ValueError(f"ADF test needs >= 20 points, got {n}")
    p = schwert_lag(n) if max_lag is None else int(max_lag)
    if p < 0:
        raise ValueError("max_lag must be non-negative")

    dx = np.diff(x)
    y = dx[p:]
    nobs = y.size
    cols = [np.ones(nobs), x[p : n - 1]]
    for i in range(1, p + 1):
        cols.append(dx[p - i : dx.size - i])
    X = np.column_stack(cols)
    k = X.shape[1]
    if nobs <= k:
        raise NumericalError(
            f"too few observations ({nobs}) for {k} regressors; lower max_lag"
        )
    if np.linalg.matrix_rank(X) < k:
        raise NumericalError("singular ADF regression matrix (collinear regressors)")

    xtx = X.T @ X
    beta = np.linalg.solve(xtx, X.T @ y)
    resid = y - X @ beta
    s2 = float(resid @ resid) / (nobs - k)
    if not np.isfinite(s2) or s2 <= 0.0:
        raise NumericalError("degenerate residual variance in ADF regression")
    se_gamma = math.sqrt(s2 * np.linalg.inv(xtx)[1, 1])
    stat = float(beta[1] / se_gamma)

    crit = df_critical_values(nobs)
    return StationarityResult(
        statistic=stat,
        lags_used=p,
        critical_values=crit,
        reject_1pct=stat < crit["1%"],
        reject_5pct=stat < crit["5%"],
        reject_10pct=stat < crit["10%"],
    )
