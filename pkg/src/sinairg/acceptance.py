"""Acceptance suite: every check that decides whether the simulations
reproduce the exact laws.

Each criterion is a function of a :class:`Context` returning a
:class:`Result` made of named sub-checks.  Expensive Monte Carlo batches are
built once per context and shared between criteria.

Profiles: ``desk`` uses the full sample sizes; ``quick`` shrinks them for
smoke runs, so its verdicts carry much less statistical weight.
"""

from __future__ import annotations

import contextlib
import io
import math
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path as FsPath

import numpy as np
from scipy import integrate

from . import coarsen, envgrid, laws, renewal, streams, verify
from .errors import InsufficientDomain, SinaiError, WindowExhausted

DEFAULT_SEED = 20240611

PROFILES = {
    "desk": dict(
        replicas=100_000, window=10_001, small_window=1_001, x_list=(10.0, 30.0, 100.0, 300.0, 1000.0),
        renewal_runs=10_000, grid_paths=5000, grid_step=1e-3, half_length=100.0, comm_paths=100,
        ldp_n15=10_000_000, ldp_n20=100_000_000, sampler_n=1_000_000,
    ),
    "quick": dict(
        replicas=4000, window=2001, small_window=501, x_list=(10.0, 30.0, 100.0, 300.0, 1000.0),
        renewal_runs=4000, grid_paths=300, grid_step=1e-2, half_length=50.0, comm_paths=20,
        ldp_n15=2_000_000, ldp_n20=30_000_000, sampler_n=200_000,
    ),
}


@dataclass
class Check:
    name: str
    measured: float
    target: float
    tolerance: float
    passed: bool

    @classmethod
    def near(cls, name, measured, target, tol):
        measured = float(measured)
        return cls(name, measured, float(target), float(tol), bool(abs(measured - target) <= tol))

    @classmethod
    def at_most(cls, name, measured, bound):
        measured = float(measured)
        return cls(name, measured, 0.0, float(bound), bool(measured <= bound))

    def as_dict(self) -> dict:
        return dict(name=self.name, measured=self.measured, target=self.target,
                    tolerance=self.tolerance, passed=self.passed)


@dataclass
class Result:
    id: int
    title: str
    checks: list = field(default_factory=list)
    note: str = ""
    error: str = ""
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.error and bool(self.checks) and all(c.passed for c in self.checks)

    def line(self) -> str:
        head = f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.id:2d} {self.title}"
        if self.error:
            return f"{head}: error: {self.error}"
        parts = [f"{c.name}={c.measured:.6g} (target {c.target:.6g} +- {c.tolerance:.3g})" for c in self.checks]
        return head + ": " + "; ".join(parts)

    def as_dict(self) -> dict:
        return dict(
            id=self.id, title=self.title, passed=self.passed,
            measured={c.name: c.measured for c in self.checks},
            target={c.name: c.target for c in self.checks},
            tolerance={c.name: c.tolerance for c in self.checks},
            checks=[c.as_dict() for c in self.checks],
            note=self.note, error=self.error, seconds=round(self.seconds, 3),
        )


class Context:
    """Profile parameters plus lazily built shared batches."""

    def __init__(self, profile: str = "desk", seed: int = DEFAULT_SEED):
        if profile not in PROFILES:
            raise ValueError(f"unknown profile {profile!r}")
        self.profile = profile
        self.seed = int(seed)
        self.p = dict(PROFILES[profile])
        self._synth = {}

    def synthetic(self, window: int, x_max: float) -> coarsen.SyntheticBatch:
        key = (window, x_max)
        if key not in self._synth:
            self._synth[key] = coarsen.run_synthetic_batch(
                self.p["replicas"], window, x_max, streams.derive_seed(self.seed, 1, window))
        return self._synth[key]

    def main_batch(self) -> coarsen.SyntheticBatch:
        return self.synthetic(self.p["window"], max(self.p["x_list"]))


# ---------------------------------------------------------------- criteria


def c1_survival(ctx: Context) -> Result:
    b = ctx.main_batch()
    est = verify.survival_estimate(b.counts(100.0))
    target = laws.genfun(100.0, 0.0)
    r = Result(1, "sign survival P(k(100)=0)")
    r.checks.append(Check.near("p_hat", est.value, target, 3 * est.stderr))
    r.note = (f"n={est.n}, stderr={est.stderr:.3g}, window={b.n_slopes}, "
              f"policy={b.policy}, mean end appends={b.n_replenished.mean():.3g}")
    return r


def c2_genfun(ctx: Context) -> Result:
    b = ctx.main_batch()
    r = Result(2, "generating function at z=0.5")
    for x in (10.0, 100.0):
        est = verify.estimate_genfun(b.counts(x), 0.5)
        r.checks.append(Check.near(f"a_hat({x:g},0.5)", est.value, laws.genfun(x, 0.5), 3 * est.stderr))
    return r


def c3_exponent(ctx: Context) -> Result:
    b = ctx.main_batch()
    pts = [(x, verify.survival_estimate(b.counts(x)).value) for x in ctx.p["x_list"]]
    r = Result(3, "survival exponent")
    r.checks.append(Check.near("loglog_slope", verify.loglog_slope(pts), laws.LAM1, 0.02))
    return r


def censored_ratio_pit(flip_lists, x_max: float):
    """Probability integral transforms of consecutive flip ratios.

    A ratio ``X_{k+1}/X_k`` is only seen when ``X_{k+1} <= x_max``, so its
    observed law is the ratio law truncated at ``x_max / X_k``.  Returns the
    transforms ``u = F(r) / F(x_max / X_k)`` (i.i.d. uniform under the ratio
    law) together with the index pairs of consecutive ratios within a run.
    """
    us = []
    first = []
    second = []
    pos = 0
    for f in flip_lists:
        if f.size < 2:
            continue
        r = f[1:] / f[:-1]
        cap = x_max / f[:-1]
        us.append(laws.ratio_cdf(r) / laws.ratio_cdf(cap))
        k = r.size
        first.extend(range(pos, pos + k - 1))
        second.extend(range(pos + 1, pos + k))
        pos += k
    u = np.concatenate(us) if us else np.empty(0)
    return u, np.array(first, dtype=np.int64), np.array(second, dtype=np.int64)


def c4_ratio_law(ctx: Context) -> Result:
    b = ctx.main_batch()
    u, i, j = censored_ratio_pit(b.flips, b.x_max)
    r = Result(4, "ratio law of consecutive flip levels")
    r.checks.append(Check("n_ratios", float(u.size), 1e4, 0.0, bool(u.size >= 10_000)))
    u = np.clip(u, 0.0, 1.0 - 1e-15)
    r.checks.append(Check.at_most("ks_pit", verify.ks_distance(u, lambda v: v), 0.02))
    # map back to log-ratio scale with the truncation removed
    y = laws.log_ratio_quantile(u)
    r.checks.append(Check.near("corr_log_ratio", verify.correlation(y[i], y[j]), 0.0, 0.03))
    raw = np.concatenate([np.diff(np.log(f)) for f in b.flips if f.size > 1])
    r.note = (f"pairs for correlation={i.size}; uncorrected KS of raw log ratios="
              f"{verify.ks_distance(raw, laws.log_ratio_cdf):.4f} (truncated at x_max={b.x_max:g})")
    return r


def c5_growth(ctx: Context) -> Result:
    ts = np.array([20.0, 25.0, 30.0, 35.0, 40.0])
    means = []
    for k, t in enumerate(ts):
        c = renewal.simulate_counts([math.exp(t)], ctx.p["renewal_runs"], streams.derive_seed(ctx.seed, 5, k))
        means.append(c.mean())
    slope = np.polyfit(ts, means, 1)[0]
    r = Result(5, "growth rate of mean flip count")
    r.checks.append(Check.near("slope", slope, 1.0 / 3.0, 0.01))
    return r


def c6_grid(ctx: Context) -> Result:
    p = ctx.p
    g = envgrid.grid_statistics(p["grid_paths"], p["grid_step"], p["half_length"], 1.0,
                                streams.derive_seed(ctx.seed, 6))
    nb_excess = np.concatenate((g.left_excess, g.right_excess))
    nb_length = np.concatenate((g.left_length, g.right_length))
    r = Result(6, "grid statistics at level 1")
    r.checks += [
        Check.at_most("ks_central_excess", verify.ks_distance(g.central_excess, laws.central_excess_cdf), 0.03),
        Check.at_most("ks_neighbor_excess", verify.ks_distance(nb_excess, laws.exp_cdf), 0.03),
        Check.near("mean_central_length", g.central_length.mean(), 5.0 / 3.0, 0.05),
        Check.near("mean_neighbor_length", nb_length.mean(), 1.0, 0.03),
        Check.at_most("ks_rel_origin", verify.ks_distance(g.rel_origin, lambda v: np.clip(v, 0, 1)), 0.03),
        Check.near("p_up", np.mean(g.direction == envgrid.UP), 0.5, 0.02),
    ]
    r.note = f"paths={len(g)}, neighbor samples={nb_excess.size}"
    return r


def commutes(path: envgrid.Path, x1: float, x2: float) -> bool:
    """Does coarsening the level-x1 chain to x2 reproduce the level-x2 chain?"""
    try:
        ref = envgrid.extract_slopes(path, x2)
        eng = coarsen.engine_from_chain(envgrid.extract_slopes(path, x1))
        eng.advance_to(x2)
        got = eng.chain_at()
    except (InsufficientDomain, WindowExhausted):
        return False
    return (np.array_equal(got.left, ref.left) and np.array_equal(got.right, ref.right)
            and np.array_equal(got.direction, ref.direction) and got.central_index == ref.central_index
            and np.allclose(got.height, ref.height, rtol=1e-12, atol=1e-12))


def c7_commutation(ctx: Context) -> Result:
    n = ctx.p["comm_paths"]
    seed = streams.derive_seed(ctx.seed, 7)
    ok = sum(commutes(envgrid.sample_path(50.0, 1e-2, seed, replica=i), 1.0, 2.0) for i in range(n))
    r = Result(7, "coarsening commutes with re-extraction")
    r.checks.append(Check("identical_paths", float(ok), float(n), 0.0, ok == n))
    return r


def c8_pde(ctx: Context) -> Result:
    res = max(max(abs(v) for v in laws.ode_residual(x, z)) for x in (1.5, 2.0, 5.0, 10.0) for z in (-0.5, 0.0, 0.5))
    init = max(abs(laws.central_excess_genfun(1.0, y, z) - (2 * y / 3 + 1) * math.exp(-y))
               for y in (0.0, 1.0, 3.0) for z in (-0.5, 0.0, 0.5))
    r = Result(8, "ODE/PDE residuals")
    r.checks += [
        Check.at_most("max_ode_residual", res, 1e-9),
        Check.at_most("pde_residual", abs(laws.pde_residual(2.0, 0.7, 0.3, 1e-4)), 1e-5),
        Check.at_most("initial_condition", init, 1e-12),
    ]
    return r


def c9_ldp(ctx: Context) -> Result:
    target = laws.rate_function(1.0)
    e15 = renewal.ldp_tail_estimate(1.0, 15.0, ctx.p["ldp_n15"], streams.derive_seed(ctx.seed, 9, 15))
    e20 = renewal.ldp_tail_estimate(1.0, 20.0, ctx.p["ldp_n20"], streams.derive_seed(ctx.seed, 9, 20))
    gain = abs(e15.rate - target) - abs(e20.rate - target)
    r = Result(9, "large-deviation tail rate at a=1")
    r.checks += [
        Check.near("rate_t15", e15.rate, target, 0.3 * target),
        Check("improvement_t20", gain, 0.0, 0.0, bool(gain > 0)),
    ]
    r.note = f"hits t=15: {e15.hits}/{e15.n}, t=20: {e20.hits}/{e20.n}, rate_t20={e20.rate:.4f}"
    return r


def c10_samplers(ctx: Context) -> Result:
    n = ctx.p["sampler_n"]
    rng = [streams.rng_for(streams.derive_seed(ctx.seed, 10), streams.SAMPLER, k) for k in range(3)]
    r = Result(10, "exact samplers")
    r.checks += [
        Check.near("mean_log_ratio", laws.sample_log_ratio(rng[0], n).mean(), 3.0, 0.02),
        Check.near("mean_central_excess", laws.sample_central_excess(rng[1], n).mean(), 5.0 / 3.0, 0.01),
        Check.near("median_first_flip", np.median(laws.sample_first_flip(rng[2], n)), laws.first_flip_quantile(0.5), 0.1),
    ]
    return r


def c11_length_law(ctx: Context) -> Result:
    # the mass below t = 0.01 is of order 1e-23
    def quad(g):
        return integrate.quad(lambda t: g(t) * laws.slope_length_density(t), 0.01, np.inf,
                              epsabs=1e-13, epsrel=1e-12, limit=200)[0]

    r = Result(11, "slope length density")
    r.checks += [
        Check.near("mass", quad(lambda t: 1.0), 1.0, 1e-8),
        Check.near("mean", quad(lambda t: t), 1.0, 1e-8),
        Check.near("laplace_half", quad(lambda t: math.exp(-t / 2)), 1.0 / math.cosh(1.0), 1e-8),
    ]
    return r


def c12_reproducibility(ctx: Context) -> Result:
    from . import cli

    outputs = []
    with tempfile.TemporaryDirectory() as tmp:
        for k in range(2):
            d = FsPath(tmp) / f"run{k}"
            with contextlib.redirect_stdout(io.StringIO()):
                cli.main(["coarsen", "--replicas", "10", "--x-max", "100", "--seed", "7", "--out-dir", str(d)])
                cli.main(["renewal", "--replicas", "10", "--x-max", "100", "--seed", "7", "--out-dir", str(d / "r")])
            outputs.append({p.relative_to(d): p.read_bytes() for p in sorted(d.rglob("*.csv"))})
    same = bool(outputs[0]) and outputs[0] == outputs[1]

    target = laws.genfun(100.0, 0.0)
    big = verify.survival_estimate(ctx.main_batch().counts(100.0))
    small = verify.survival_estimate(ctx.synthetic(ctx.p["small_window"], 100.0).counts(100.0))
    joint = math.hypot(big.stderr, small.stderr)
    r = Result(12, "reproducibility and window robustness")
    r.checks += [
        Check("byte_identical_csv", float(same), 1.0, 0.0, same),
        Check.near("p_hat_small_window", small.value, target, 3 * small.stderr),
        Check.near("p_hat_window_gap", small.value - big.value, 0.0, 3 * joint),
    ]
    r.note = f"windows {ctx.p['small_window']} and {ctx.p['window']}"
    return r


CRITERIA = (
    c1_survival, c2_genfun, c3_exponent, c4_ratio_law, c5_growth, c6_grid,
    c7_commutation, c8_pde, c9_ldp, c10_samplers, c11_length_law, c12_reproducibility,
)


def run_criterion(ctx: Context, k: int) -> Result:
    fn = CRITERIA[k - 1]
    t0 = time.perf_counter()
    try:
        r = fn(ctx)
    except (SinaiError, ValueError, ArithmeticError, RuntimeError) as exc:
        r = Result(k, fn.__name__, error=f"{type(exc).__name__}: {exc}")
    r.seconds = time.perf_counter() - t0
    return r


def run_all(profile: str = "desk", seed: int = DEFAULT_SEED, only=None) -> list[Result]:
    ctx = Context(profile, seed)
    ids = only or range(1, len(CRITERIA) + 1)
    return [run_criterion(ctx, k) for k in ids]
