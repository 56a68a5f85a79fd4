"""Command-line front end.

Subcommands: ``analyze`` (closed-form curves), ``simulate`` (Monte Carlo),
``validate`` (closed form vs Monte Carlo), ``optimize`` (gain curves) and
``figure`` (trend reproductions). All output is CSV. The first line is a
``#`` provenance comment (version, seed, config hash), then a header row.

Exit codes: 0 success, 2 malformed input, 3 search cap exceeded,
4 validation or trend failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .errors import SearchCapExceeded
from .figures import FIGURES, path_distributions, run_figure
from .metrics import MODULATIONS, CapacityParams, abep, capacity_upper_bound, ergodic_capacity, mean_sinr
from .montecarlo import CDF_COLUMNS, McConfig, cdf_table, estimate_metrics, ks_distance, simulate_link
from .optimize import DEFAULT_CAP, GAIN_COLUMNS, GainExperiment, gain_curve
from .scenario import load_link_configs

EXIT_OK, EXIT_INPUT, EXIT_CAP, EXIT_VALIDATION = 0, 2, 3, 4
KS_THRESHOLD = 0.005

log = logging.getLogger("cotether")


class ConfigError(ValueError):
    """Malformed experiment configuration or arguments."""


# ---------------------------------------------------------------------------
# Parsing helpers
# ---------------------------------------------------------------------------


def parse_grid(text: str, log_spaced: bool = False) -> np.ndarray:
    """``min:max:steps`` -> increasing grid (geometric when ``log_spaced``)."""
    try:
        lo, hi, steps = text.split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError:
        raise ConfigError(f"grid must look like min:max:steps, got {text!r}") from None
    if steps < 1:
        raise ConfigError("grid must contain at least one point")
    if lo < 0 or (steps > 1 and not hi > lo):
        raise ConfigError("grid must be non-negative and increasing")
    if log_spaced:
        if lo <= 0:
            raise ConfigError("a log-spaced grid needs a positive minimum")
        return np.geomspace(lo, hi, steps)
    return np.linspace(lo, hi, steps)


def parse_int_list(text: str) -> tuple[int, ...]:
    """``2,3,5`` or ``2-7`` (inclusive range) or a mix."""
    out: list[int] = []
    try:
        for part in text.split(","):
            if "-" in part:
                a, b = part.split("-")
                out.extend(range(int(a), int(b) + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise ConfigError(f"bad integer list {text!r}") from None
    if not out or any(v < 0 for v in out):
        raise ConfigError(f"bad integer list {text!r}")
    return tuple(out)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def config_hash(args: argparse.Namespace) -> str:
    """sha256 over the effective arguments and the bytes of every referenced file."""
    effective = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "workers", "func", "verbose")}
    for key in ("budget", "scenario"):
        path = effective.get(key)
        if path:
            effective[key + "_sha256"] = hashlib.sha256(Path(path).read_bytes()).hexdigest()
    return hashlib.sha256(json.dumps(effective, sort_keys=True, default=str).encode()).hexdigest()


def write_csv(args, columns, rows) -> None:
    buf = io.StringIO()
    buf.write(f"# cotether {__version__} seed={args.seed} config_sha256={config_hash(args)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    if args.out in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        Path(args.out).write_text(buf.getvalue())


def _load_paths(args):
    if not args.budget:
        raise ConfigError("--budget is required")
    if not Path(args.budget).exists():
        raise ConfigError(f"budget file {args.budget} does not exist")
    try:
        return path_distributions(load_link_configs(args.budget))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad budget file {args.budget}: {exc}") from exc


def _describe(d) -> str:
    return repr(d)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_analyze(args) -> int:
    paths = _load_paths(args)
    m = MODULATIONS[args.modulation]
    if args.metric == "op":
        grid = parse_grid(args.gamma_th, args.log_grid)
        rows = [
            dict(path=name, gamma_th=float(g), outage=float(d.cdf(g)))
            for name, d in paths.items()
            for g in grid
        ]
        write_csv(args, ("path", "gamma_th", "outage"), rows)
        return EXIT_OK
    rows = []
    for name, d in paths.items():
        p = CapacityParams(args.nh if name == "hybrid" else 1)
        rows.append(
            dict(path=name, nh=p.NH, abep=abep(d, m), mean_sinr=mean_sinr(d),
                 capacity=ergodic_capacity(d, p), capacity_bound=capacity_upper_bound(d, p))
        )
    write_csv(args, ("path", "nh", "abep", "mean_sinr", "capacity", "capacity_bound"), rows)
    return EXIT_OK


def _select(paths, name):
    if name is None:
        name = "hybrid" if "hybrid" in paths else next(iter(paths))
    if name not in paths:
        raise ConfigError(f"path {name!r} is not in the budget (have {sorted(paths)})")
    return name, paths[name]


def cmd_simulate(args) -> int:
    paths = _load_paths(args)
    name, d = _select(paths, args.path)
    e = simulate_link(McConfig(args.samples, args.seed, args.workers), d)
    if args.metric == "summary":
        p = CapacityParams(args.nh if name == "hybrid" else 1)
        th = float(parse_grid(args.gamma_th, args.log_grid)[0])
        est = estimate_metrics(e, MODULATIONS[args.modulation], p, th)
        cols = ("path", "n_samples", "abep", "abep_se", "mean_sinr", "mean_sinr_se",
                "capacity", "capacity_se", "gamma_th", "op", "op_se")
        row = dict(path=name, n_samples=e.n, gamma_th=th, **vars(est))
        write_csv(args, cols, [row])
        return EXIT_OK
    grid = parse_grid(args.gamma_th, args.log_grid)
    write_csv(args, CDF_COLUMNS, cdf_table(e, d, grid))
    return EXIT_OK


def cmd_validate(args) -> int:
    paths = _load_paths(args)
    rows = []
    failed = False
    for i, (name, d) in enumerate(paths.items()):
        seed = args.seed + i
        e = simulate_link(McConfig(args.samples, seed, args.workers), d)
        ks = ks_distance(e, d)
        ok = ks <= args.threshold
        if not ok:
            failed = True
            log.error("validation failed: path=%s variant=%s seed=%d ks=%.6g", name, _describe(d), seed, ks)
        rows.append(dict(path=name, variant=type(d).__name__, parameters=_describe(d), seed=seed,
                         n_samples=args.samples, ks=ks, threshold=args.threshold, passed=ok))
    write_csv(args, ("path", "variant", "parameters", "seed", "n_samples", "ks", "threshold", "passed"), rows)
    return EXIT_VALIDATION if failed else EXIT_OK


def _experiment_from_args(args) -> GainExperiment:
    cfg: dict = {}
    params: dict = {}
    if args.scenario:
        if not Path(args.scenario).exists():
            raise ConfigError(f"scenario file {args.scenario} does not exist")
        data = yaml.safe_load(Path(args.scenario).read_text()) or {}
        cfg = dict(data.pop("experiment", {}) or {})
        for key in ("p_enb", "p_ap", "f_cell", "f_wlan", "noise_power"):
            if key in data:
                params[key] = float(data[key])
        gen = data.get("generate", {}) or {}
        if "sites" in gen:
            cfg.setdefault("layout", "multi" if int(gen["sites"]) > 1 else "single")
            cfg.setdefault("sites", int(gen["sites"]))
        if "inter_site_distance" in gen:
            cfg.setdefault("inter_site_distance", float(gen["inter_site_distance"]))
        if "cell_radius" in data:
            cfg.setdefault("cell_radius", float(data["cell_radius"]))
        if "rng_seed" in data:
            cfg.setdefault("seed", int(data["rng_seed"]))
    overrides = dict(Ns=args.n and parse_int_list(args.n), Ms=args.m and parse_int_list(args.m),
                     replications=args.reps, Q=args.q, objective=args.objective, layout=args.layout,
                     schemes=args.schemes and tuple(args.schemes.split(",")), cap=args.cap)
    if args.seed_given:
        overrides["seed"] = args.seed
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    for key in ("Ns", "Ms", "schemes"):
        if key in cfg and not isinstance(cfg[key], tuple):
            cfg[key] = tuple(cfg[key])
    if "Ns" not in cfg or "Ms" not in cfg:
        raise ConfigError("optimize needs UE counts (--n) and AP counts (--m)")
    try:
        return GainExperiment(scenario_params=params, **cfg)
    except TypeError as exc:
        raise ConfigError(f"bad experiment block: {exc}") from exc


def cmd_optimize(args) -> int:
    exp = _experiment_from_args(args)
    args.seed = exp.seed
    write_csv(args, GAIN_COLUMNS, gain_curve(exp))
    return EXIT_OK


def cmd_figure(args) -> int:
    res = run_figure(args.number, args.seed, args.samples, args.workers, args.reps)
    write_csv(args, res.columns, res.rows)
    for name, ok, detail in res.checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}{' ' + detail if detail else ''}", file=sys.stderr)
    return EXIT_OK if res.passed else EXIT_VALIDATION


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


class _SeedAction(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        setattr(namespace, self.dest, values)
        namespace.seed_given = True


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, action=_SeedAction)
    common.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--verbose", action="store_true")

    budget = argparse.ArgumentParser(add_help=False)
    budget.add_argument("--budget", help="abstract link budget CSV (path, role, count, mean)")
    budget.add_argument("--gamma-th", default="0.1:1000:20", help="threshold grid min:max:steps")
    budget.add_argument("--log-grid", action="store_true", help="space the threshold grid geometrically")
    budget.add_argument("--modulation", choices=sorted(MODULATIONS), default="dbpsk")
    budget.add_argument("--nh", type=int, choices=(1, 2), default=2, help="hops dividing hybrid capacity")

    p = argparse.ArgumentParser(prog="cotether", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"cotether {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common, budget], help="closed-form metric curves")
    a.add_argument("--metric", choices=("op", "summary"), default="op")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", parents=[common, budget], help="Monte Carlo estimates and empirical CDFs")
    s.add_argument("--samples", type=int, default=1_000_000)
    s.add_argument("--path", help="link kind to simulate (default: hybrid end-to-end if configured)")
    s.add_argument("--metric", choices=("cdf", "summary"), default="cdf")
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("validate", parents=[common, budget], help="closed form vs Monte Carlo KS report")
    v.add_argument("--samples", type=int, default=1_000_000)
    v.add_argument("--threshold", type=float, default=KS_THRESHOLD)
    v.set_defaults(func=cmd_validate)

    o = sub.add_parser("optimize", parents=[common], help="hybrid-over-cellular gain curves")
    o.add_argument("--scenario", help="YAML scenario with an optional 'experiment' block")
    o.add_argument("--n", help="UE counts, e.g. 2-7 or 2,4")
    o.add_argument("--m", help="AP counts, e.g. 1-5")
    o.add_argument("--reps", type=int, help="random scenarios per (N, M)")
    o.add_argument("--q", type=int, help="UEs searched exhaustively in the greedy first stage")
    o.add_argument("--cap", type=int, default=None, help=f"exhaustive evaluation cap (default {DEFAULT_CAP})")
    o.add_argument("--schemes", help="comma list of greedy,exhaustive")
    o.add_argument("--objective", choices=("total", "maxmin"))
    o.add_argument("--layout", choices=("single", "multi"))
    o.set_defaults(func=cmd_optimize)

    f = sub.add_parser("figure", parents=[common], help="scaled-down figure trend reproduction")
    f.add_argument("number", type=int, choices=FIGURES)
    f.add_argument("--samples", type=int, default=0, help="Monte Carlo samples (figure 3 only)")
    f.add_argument("--reps", type=int, help="random scenarios per point (optimizer figures)")
    f.set_defaults(func=cmd_figure)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "seed_given"):
        args.seed_given = False
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if getattr(args, "samples", 0) < 0:
            raise ConfigError("--samples must be non-negative")
        if args.workers < 1:
            raise ConfigError("--workers must be positive")
        return args.func(args)
    except SearchCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ConfigError, ValueError, OSError, yaml.YAMLError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
