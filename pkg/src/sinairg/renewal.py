"""Sign changes simulated from their multiplicative renewal structure.

Flip levels satisfy ``X_{k+1} = X_k r_k`` with i.i.d. ratios, and ``X_1`` has
survival ``a(x, 0)``.  Nothing here touches the coarsening engine, so the two
give independent routes to the same counts.

Bulk runs work in log space, in blocks of :data:`BLOCK` runs; block ``j``
draws from stream ``(seed, RENEWAL_BLOCK, j)``, so results depend only on
``(n, seed)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import laws, streams
from .coarsen import SignChangeLog
from .errors import InsufficientHits

BLOCK = 1 << 20
MIN_HITS = 20


@dataclass(frozen=True)
class RenewalRun:
    seed: int
    x_max: float
    log: SignChangeLog


def simulate_sign_changes(x_max: float, seed: int, replica: int = 0) -> SignChangeLog:
    """Flip levels in ``[1, x_max]`` for one run."""
    if not x_max >= 1:
        raise ValueError("x_max must be >= 1")
    rng = streams.rng_for(seed, streams.RENEWAL, replica)
    sign = 1 if rng.random() < 0.5 else -1
    levels = []
    x = float(laws.sample_first_flip(rng))
    while x <= x_max:
        levels.append(x)
        x *= float(laws.sample_ratio(rng))
    return SignChangeLog(sign, tuple(levels), 1.0, float(x_max))


def run(x_max: float, seed: int, replica: int = 0) -> RenewalRun:
    return RenewalRun(int(seed), float(x_max), simulate_sign_changes(x_max, seed, replica))


def count_flips(log: SignChangeLog, x: float) -> int:
    """Number of flip levels ``<= x``."""
    if x > log.x_max:
        raise ValueError(f"x={x} lies beyond the completed range {log.x_max} of the log")
    return int(np.searchsorted(np.asarray(log.levels, dtype=float), x, side="right"))


def _block_counts(rng: np.random.Generator, m: int, log_x: np.ndarray, cap: int | None) -> np.ndarray:
    """Counts ``k(e^t)`` for each ``t`` in ``log_x`` over ``m`` runs.

    With ``cap`` set, a run stops once its count at the largest ``t``
    reaches ``cap``, so counts there are truncated at ``cap``.
    """
    t_top = log_x[-1]
    counts = np.zeros((m, log_x.size), dtype=np.int64)
    s = laws.sample_first_flip(rng, m, log=True)
    idx = np.arange(m)
    while idx.size:
        counts[idx] += s[:, None] <= log_x[None, :]
        keep = s <= t_top
        if cap is not None:
            keep &= counts[idx, -1] < cap
        idx = idx[keep]
        s = s[keep] + laws.sample_log_ratio(rng, idx.size)
    return counts


def simulate_counts(x_list, n: int, seed: int, cap: int | None = None) -> np.ndarray:
    """``(n, len(x_list))`` array of flip counts at each level of ``x_list``."""
    x = np.asarray(x_list, dtype=float)
    if x.ndim != 1 or x.size == 0 or np.any(x < 1) or np.any(np.diff(x) < 0):
        raise ValueError("x_list must be a nondecreasing list of levels >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    log_x = np.log(x)
    out = np.empty((n, x.size), dtype=np.int64)
    for j, lo in enumerate(range(0, n, BLOCK)):
        m = min(BLOCK, n - lo)
        out[lo:lo + m] = _block_counts(streams.rng_for(seed, streams.RENEWAL_BLOCK, j), m, log_x, cap)
    return out


@dataclass(frozen=True)
class TailEstimate:
    a: float
    t: float
    n: int
    hits: int
    threshold: int
    rate: float
    stderr: float


def ldp_tail_estimate(a: float, t: float, n: int, seed: int, min_hits: int = MIN_HITS) -> TailEstimate:
    """Estimate ``-(1/t) log P(k(e^t) >= a t)`` by direct frequency."""
    if not a > 1.0 / 3.0:
        raise ValueError("a must exceed 1/3")
    if not t > 0:
        raise ValueError("t must be positive")
    threshold = math.ceil(a * t - 1e-12)
    counts = simulate_counts([math.exp(t)], n, seed, cap=threshold)[:, 0]
    hits = int(np.count_nonzero(counts >= threshold))
    if hits < min_hits:
        raise InsufficientHits(f"{hits} exceedances in {n} runs, need at least {min_hits}")
    p = hits / n
    rate = -math.log(p) / t
    # delta method on log of a binomial frequency
    stderr = math.sqrt((1.0 - p) / hits) / t
    return TailEstimate(float(a), float(t), int(n), hits, threshold, rate, stderr)
