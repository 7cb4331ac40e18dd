"""Command-line front end.

Subcommands: gridslopes, coarsen, renewal, genfun, ldp, pdecheck, report.
Settings come from flags, optionally preloaded from a ``key=value`` file
given with ``--config`` (flags win).  All randomness derives from
``--seed``.  Exit codes: 0 success, 1 usage or input error, 2 failed
acceptance report.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import acceptance, coarsen, envgrid, laws, renewal, verify
from .errors import SinaiError

DEFAULTS = dict(
    seed=1, replicas=1000, window=10_001, x_max=100.0, grid_step=1e-3, half_length=100.0,
    z_list=[0.0, 0.5], x_list=None, out_dir=".", format="csv", level=1.0, policy=coarsen.DEFAULT_POLICY,
    a=1.0, t=15.0, profile="desk", source="renewal",
)
LIST_KEYS = {"z_list", "x_list"}
INT_KEYS = {"seed", "replicas", "window"}
STR_KEYS = {"out_dir", "format", "profile", "source", "policy"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _num(v: float) -> str:
    return "%.17g" % v


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def load_config(path: str) -> dict:
    """Read a flat ``key=value`` file; ``#`` starts a comment."""
    cfg = {}
    for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"{path}:{n}: unknown key {key!r}")
        try:
            if key in LIST_KEYS:
                cfg[key] = _floats(val)
            elif key in INT_KEYS:
                cfg[key] = int(val)
            elif key in STR_KEYS:
                cfg[key] = val
            else:
                cfg[key] = float(val)
        except ValueError:
            raise UsageError(f"{path}:{n}: bad value for {key}") from None
    return cfg


def _settings(args) -> dict:
    s = dict(DEFAULTS)
    if args.config:
        s.update(load_config(args.config))
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            s[key] = v
    if s["replicas"] < 1:
        raise UsageError("replicas must be >= 1")
    if s["x_max"] < 1:
        raise UsageError("x_max must be >= 1")
    if s["window"] < 3 or s["window"] % 2 == 0:
        raise UsageError("window must be odd and >= 3")
    if s["policy"] not in coarsen.POLICIES:
        raise UsageError(f"policy must be one of {sorted(coarsen.POLICIES)}")
    if s["format"] not in ("csv", "json"):
        raise UsageError("format must be csv or json")
    return s


def _write(s: dict, name: str, header: list[str], rows) -> Path:
    out = Path(s["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    if s["format"] == "json":
        path = out / f"{name}.json"
        recs = [{k: None if isinstance(v, float) and math.isnan(v) else v for k, v in zip(header, r)} for r in rows]
        path.write_text(json.dumps(recs, indent=1) + "\n")
    else:
        path = out / f"{name}.csv"
        lines = [",".join(header)]
        for r in rows:
            lines.append(",".join(v if isinstance(v, str) else _num(v) if isinstance(v, float) else str(v) for v in r))
        path.write_text("\n".join(lines) + "\n")
    return path


def _x_list(s: dict) -> list[float]:
    xs = s["x_list"] or [s["x_max"]]
    if any(x < 1 or x > s["x_max"] for x in xs):
        raise UsageError("x_list entries must lie in [1, x_max]")
    return sorted(xs)


def _survival_rows(counts_at, xs):
    rows = []
    for x in xs:
        est = verify.survival_estimate(counts_at(x))
        rows.append((float(x), est.n, est.value, est.stderr, float(laws.genfun(x, 0.0))))
    return rows


def _flip_rows(flips):
    return [(i, j, float(v)) for i, f in enumerate(flips) for j, v in enumerate(f)]


# ------------------------------------------------------------ subcommands


def cmd_gridslopes(s):
    g = envgrid.grid_statistics(s["replicas"], s["grid_step"], s["half_length"], s["level"], s["seed"])
    rows = [
        (i, float(g.central_excess[i]), float(g.central_length[i]),
         "up" if g.direction[i] == envgrid.UP else "down", float(g.rel_origin[i]), float(g.right_excess[i]))
        for i in range(len(g))
    ]
    header = ["path_id", "central_excess", "central_length", "direction", "rel_origin", "neighbor_excess"]
    return [_write(s, "gridstats", header, rows)]


def cmd_coarsen(s):
    xs = _x_list(s)
    b = coarsen.run_synthetic_batch(s["replicas"], s["window"], s["x_max"], s["seed"], policy=s["policy"])
    return [
        _write(s, "flips", ["replica", "flip_index", "level"], _flip_rows(b.flips)),
        _write(s, "survival", ["x", "n", "p_hat", "stderr", "analytic"], _survival_rows(b.counts, xs)),
    ]


def _renewal_logs(s):
    return [renewal.simulate_sign_changes(s["x_max"], s["seed"], replica=i) for i in range(s["replicas"])]


def cmd_renewal(s):
    xs = _x_list(s)
    logs = _renewal_logs(s)
    flips = [np.asarray(g.levels) for g in logs]

    def counts_at(x):
        return np.array([renewal.count_flips(g, x) for g in logs])

    return [
        _write(s, "flips", ["replica", "flip_index", "level"], _flip_rows(flips)),
        _write(s, "survival", ["x", "n", "p_hat", "stderr", "analytic"], _survival_rows(counts_at, xs)),
    ]


def cmd_genfun(s):
    xs = s["x_list"] or [s["x_max"]]
    if any(x < 1 for x in xs):
        raise UsageError("levels must be >= 1")
    xs = sorted(xs)
    if s["source"] == "coarsen":
        b = coarsen.run_synthetic_batch(s["replicas"], s["window"], xs[-1], s["seed"], policy=s["policy"])
        counts = np.stack([b.counts(x) for x in xs], axis=1)
    elif s["source"] == "renewal":
        counts = renewal.simulate_counts(xs, s["replicas"], s["seed"])
    else:
        raise UsageError("source must be coarsen or renewal")
    rows = []
    for j, x in enumerate(xs):
        for z in s["z_list"]:
            est = verify.estimate_genfun(counts[:, j], z)
            rows.append((float(x), float(z), est.n, est.value, est.stderr, float(laws.genfun(x, z))))
    return [_write(s, "genfun", ["x", "z", "n", "estimate", "stderr", "analytic"], rows)]


def cmd_ldp(s):
    e = renewal.ldp_tail_estimate(s["a"], s["t"], s["replicas"], s["seed"])
    header = ["a", "t", "n", "threshold", "hits", "rate", "stderr", "rate_function"]
    row = (e.a, e.t, e.n, e.threshold, e.hits, e.rate, e.stderr, float(laws.rate_function(e.a)))
    return [_write(s, "ldp", header, [row])]


def cmd_pdecheck(s):
    rows = []
    for x in (1.5, 2.0, 5.0, 10.0):
        for z in (-0.5, 0.0, 0.5):
            ra, rb = laws.ode_residual(x, z)
            rows.append(("ode", x, z, float("nan"), float(abs(ra) + abs(rb))))
    rows.append(("pde", 2.0, 0.3, 0.7, float(abs(laws.pde_residual(2.0, 0.7, 0.3, 1e-4)))))
    for y in (0.0, 1.0, 3.0):
        for z in (-0.5, 0.0, 0.5):
            d = laws.central_excess_genfun(1.0, y, z) - (2 * y / 3 + 1) * math.exp(-y)
            rows.append(("initial", 1.0, z, y, float(abs(d))))
    return [_write(s, "pdecheck", ["check", "x", "z", "y", "abs_residual"], rows)]


def cmd_report(s):
    results = acceptance.run_all(s["profile"], s["seed"] if s["seed_given"] else acceptance.DEFAULT_SEED)
    out = Path(s["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    path = out / "report.json"
    doc = dict(profile=s["profile"], passed=all(r.passed for r in results),
               criteria=[r.as_dict() for r in results])
    path.write_text(json.dumps(doc, indent=1) + "\n")
    for r in results:
        print(r.line())
    return [path], doc["passed"]


COMMANDS = {
    "gridslopes": cmd_gridslopes, "coarsen": cmd_coarsen, "renewal": cmd_renewal, "genfun": cmd_genfun,
    "ldp": cmd_ldp, "pdecheck": cmd_pdecheck, "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sinairg", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key=value settings file; flags override it")
    common.add_argument("--seed", type=int)
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("--format", choices=("csv", "json"))
    rep = _Parser(add_help=False)
    rep.add_argument("--replicas", type=int)
    syn = _Parser(add_help=False)
    syn.add_argument("--window", type=int, help="odd number of synthetic slopes")
    syn.add_argument("--policy", choices=tuple(coarsen.POLICIES), help="how the finite window is extended")
    lev = _Parser(add_help=False)
    lev.add_argument("--x-max", dest="x_max", type=float)
    lev.add_argument("--x-list", dest="x_list", type=_floats, help="levels, comma separated")

    g = sub.add_parser("gridslopes", parents=[common, rep], help="central slope statistics on sampled paths")
    g.add_argument("--grid-step", dest="grid_step", type=float)
    g.add_argument("--half-length", dest="half_length", type=float)
    g.add_argument("--level", type=float)
    sub.add_parser("coarsen", parents=[common, rep, syn, lev], help="synthetic coarsening runs")
    sub.add_parser("renewal", parents=[common, rep, lev], help="renewal simulation of flip levels")
    gf = sub.add_parser("genfun", parents=[common, rep, syn], help="generating function, analytic and estimated")
    gf.add_argument("--x", dest="x_list", type=_floats, help="levels, comma separated")
    gf.add_argument("--z", dest="z_list", type=_floats, help="z values, comma separated")
    gf.add_argument("--source", choices=("renewal", "coarsen"))
    ld = sub.add_parser("ldp", parents=[common, rep], help="tail rate of the flip count")
    ld.add_argument("--a", type=float)
    ld.add_argument("--t", type=float)
    sub.add_parser("pdecheck", parents=[common], help="residuals of the closed-form solution")
    r = sub.add_parser("report", parents=[common], help="run the acceptance suite")
    r.add_argument("--profile", choices=tuple(acceptance.PROFILES))
    return p


def _threads():
    raw = os.environ.get("SINAI_THREADS", "0").strip() or "0"
    n = int(raw)
    if n > 0:
        import numba

        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        s = _settings(args)
        s["seed_given"] = args.seed is not None or (args.config is not None and "seed" in load_config(args.config))
        _threads()
        out = COMMANDS[args.command](s)
    except UsageError as exc:
        print(f"sinairg: {exc}", file=sys.stderr)
        return 1
    except (SinaiError, ValueError, OSError) as exc:
        print(f"sinairg: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args.command == "report":
        paths, ok = out
        print(f"wrote {paths[0]}")
        return 0 if ok else 2
    for p in out:
        print(f"wrote {p}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
