"""Command line entry point.

    ipv <experiment> [--config FILE] [--d 2 --r 1.0 --reps 100000 --seed 42 --out report.json]
    ipv render disk|halfplane --seed 1 --out picture.svg
"""

from __future__ import annotations

import argparse
import json
import sys

from . import corona as co
from . import origincell as oc
from . import render
from .experiments import EXPERIMENTS, ConfigError, ExperimentConfig, run
from .rng import stream

PARAM_FLAGS = {
    "r": float, "s": float, "lambda": float, "window_A": float, "rho_min": float,
    "reps": int, "n_nuclei": int, "k": int, "xi": float, "grid": float, "seed": int,
}


def _experiment_parser(name: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog=f"ipv {name}")
    p.add_argument("--config", help="JSON file with 'd' and parameter values; flags override it")
    p.add_argument("--d", type=int)
    for key, typ in PARAM_FLAGS.items():
        p.add_argument(f"--{key.replace('_', '-')}", dest=key, type=typ)
    p.add_argument("--averaged", action="store_true", help="draw s ~ Exp(1) per replication")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="report path (default: stdout)")
    p.add_argument("--stable", action="store_true", help="write runtime_seconds as 0 for byte-stable output")
    return p


def _render_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ipv render")
    p.add_argument("kind", choices=["disk", "halfplane"])
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--n-nuclei", dest="n_nuclei", type=int, default=200)
    p.add_argument("--resolution", type=int, default=400)
    p.add_argument("--delaunay", action="store_true")
    p.add_argument("--no-corona", dest="corona", action="store_false")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--window-A", dest="window_A", type=float, default=3.0)
    p.add_argument("--rho-min", dest="rho_min", type=float, default=0.05)
    p.add_argument("--constrained", action="store_true")
    return p


def build_config(name: str, args: argparse.Namespace) -> ExperimentConfig:
    base: dict = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
        if not isinstance(base, dict):
            raise ConfigError("config", "expected a JSON object")
    d = base.pop("d", 2)
    base.pop("experiment", None)
    params = dict(base.pop("params", {}), **base)
    for key in PARAM_FLAGS:
        v = getattr(args, key)
        if v is not None:
            params[key] = v
    if args.d is not None:
        d = args.d
    if args.averaged:
        params["s"] = None
    return ExperimentConfig(name, d, params)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        print(__doc__.strip())
        print("experiments: " + ", ".join(EXPERIMENTS))
        return 0
    name, rest = argv[0], argv[1:]
    if name == "render":
        args = _render_parser().parse_args(rest)
        if args.kind == "disk":
            proc = co.sample_nuclei(2, args.n_nuclei, stream(args.seed), seed=(args.seed, 0))
            render.render_disk(proc, args.resolution, args.out, corona=args.corona, delaunay=args.delaunay)
        else:
            sample = oc.sample_deposition(args.d, args.s, args.window_A, args.rho_min, args.constrained,
                                          stream(args.seed))
            render.render_halfplane(sample, args.out)
        return 0
    if name not in EXPERIMENTS:
        print(f"error: unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}", file=sys.stderr)
        return 2
    args = _experiment_parser(name).parse_args(rest)
    try:
        cfg = build_config(name, args)
        report = run(cfg, workers=args.workers)
    except ConfigError as e:
        print(json.dumps({"error": str(e), "field": e.field}), file=sys.stderr)
        return 2
    text = report.to_json(stable=args.stable)
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
