"""Statistics used by the campaign harness."""

from __future__ import annotations

from collections import defaultdict
from typing import Any, Callable, Collection, Hashable, Iterable, Mapping, Sequence

import numpy as np
import scipy.stats


class SupportViolation(AssertionError):
    """A sampler produced something outside the enumerated support."""


def fit_loglog_slope(
    points: Sequence[tuple[float, Any]],
    n_boot: int = 1000,
    seed: int = 0,
    summary: Callable[[np.ndarray], float] = np.median,
) -> tuple[float, float]:
    """Least-squares slope of log y against log x, with a bootstrap standard error.

    Each ``y`` is either a positive number or a sequence of per-trial values
    that ``summary`` reduces. With per-trial values the bootstrap resamples
    trials within each x; with plain numbers it resamples fit residuals.
    """
    if len(points) < 3:
        raise ValueError("need at least 3 points for a slope fit")
    xs = np.array([float(x) for x, _ in points])
    samples = [np.atleast_1d(np.asarray(y, dtype=float)) for _, y in points]
    ys = np.array([float(summary(s)) if s.size > 1 else float(s[0]) for s in samples])
    if (xs <= 0).any() or (ys <= 0).any():
        raise ValueError("log-log fit needs positive x and y")
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)

    rng = np.random.default_rng(seed)
    boot = np.empty(n_boot)
    if all(s.size > 1 for s in samples):
        for b in range(n_boot):
            yb = [summary(s[rng.integers(0, s.size, s.size)]) for s in samples]
            boot[b] = np.polyfit(lx, np.log(np.maximum(yb, 1e-300)), 1)[0]
    else:
        fitted = intercept + slope * lx
        resid = ly - fitted
        for b in range(n_boot):
            boot[b] = np.polyfit(lx, fitted + rng.choice(resid, resid.size), 1)[0]
    return float(slope), float(boot.std(ddof=1))


def chi_square_uniformity(counts: Mapping[Hashable, int], support: Collection[Hashable]) -> tuple[float, float]:
    """Pearson goodness-of-fit of ``counts`` against the uniform law on ``support``."""
    support = set(support)
    outside = [key for key, c in counts.items() if c and key not in support]
    if outside:
        raise SupportViolation(f"{len(outside)} observed outcome(s) outside the enumerated support")
    total = sum(counts.values())
    if len(support) == 1 or total == 0:
        return 0.0, 1.0
    if total / len(support) < 5:
        raise ValueError("expected counts below 5; draw more samples")
    obs = np.array([counts.get(key, 0) for key in support], dtype=float)
    stat, p = scipy.stats.chisquare(obs)
    return float(stat), float(p)


def wilson_interval(hits: int, trials: int, confidence: float = 0.99) -> tuple[float, float]:
    ci = scipy.stats.binomtest(hits, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def _get(row: Any, key: str) -> Any:
    return row[key] if isinstance(row, Mapping) else getattr(row, key)


def summarize(rows: Iterable[Any], keys: Sequence[str] = ("experiment", "generator", "metric_name", "n", "k")) -> list[dict]:
    """Grouped median/mean/quantiles of ``metric_value``, plus censored fraction."""
    groups: dict[tuple, list[tuple[float, bool]]] = defaultdict(list)
    for row in rows:
        key = tuple(_get(row, k) for k in keys)
        groups[key].append((float(_get(row, "metric_value")), bool(int(_get(row, "censored")))))
    if not groups:
        raise ValueError("nothing to summarize")
    out = []
    for key in sorted(groups, key=lambda t: tuple((str(type(x)), x) for x in t)):
        vals = np.array([v for v, _ in groups[key]])
        cens = np.array([c for _, c in groups[key]])
        out.append(
            dict(
                zip(keys, key),
                count=len(vals),
                mean=float(vals.mean()),
                median=float(np.median(vals)),
                q10=float(np.quantile(vals, 0.1)),
                q90=float(np.quantile(vals, 0.9)),
                censored_fraction=float(cens.mean()),
            )
        )
    return out
