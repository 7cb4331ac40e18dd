"""Estimators and goodness-of-fit comparators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptySample

KS_CRIT_01 = 1.63  # asymptotic 1% critical value of sqrt(n) D


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    n: int

    def within(self, target: float, k: float = 3.0) -> bool:
        return abs(self.value - target) <= k * self.stderr


def mean_estimate(values) -> Estimate:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise EmptySample("no values")
    se = float(v.std(ddof=1) / np.sqrt(v.size)) if v.size > 1 else 0.0
    return Estimate(float(v.mean()), se, int(v.size))


def ks_distance(sample, cdf) -> float:
    """Kolmogorov-Smirnov distance between a sample and a continuous cdf."""
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise EmptySample("empty sample")
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(np.abs(i / n - f)), np.max(np.abs((i - 1) / n - f))))


def ks_critical(n: int) -> float:
    return KS_CRIT_01 / np.sqrt(n)


def estimate_genfun(counts, z: float) -> Estimate:
    """Empirical ``E z^k`` with its standard error."""
    k = np.asarray(counts)
    if k.size == 0:
        raise EmptySample("no counts")
    if abs(z) > 1:
        raise ValueError("|z| must be <= 1")
    return mean_estimate(np.power(float(z), k.astype(float)))


def survival_estimate(counts) -> Estimate:
    """Frequency of ``k = 0`` with binomial standard error."""
    k = np.asarray(counts)
    if k.size == 0:
        raise EmptySample("no counts")
    p = float(np.mean(k == 0))
    return Estimate(p, float(np.sqrt(p * (1 - p) / k.size)), int(k.size))


def loglog_slope(points) -> float:
    """Least-squares slope of ``log p`` against ``log x``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValueError("need at least two (x, p) points")
    if np.any(pts <= 0):
        raise ValueError("x and p must be positive")
    lx = np.log(pts[:, 0])
    if np.unique(lx).size < 2:
        raise ValueError("need at least two distinct x")
    return float(np.polyfit(lx, np.log(pts[:, 1]), 1)[0])


def correlation(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2:
        raise EmptySample("need at least two pairs")
    return float(np.corrcoef(a, b)[0, 1])
