"""Command line front end: ``aqcsim {spectrum,sweep,evolve,preset} ...``."""

from __future__ import annotations

import argparse
import sys

from .experiments import PRESETS, ExperimentConfig, Sweep, preset, run_experiment


def _number_or_sweep(text):
    return Sweep.parse(text) if ":" in text else float(text)


def _add_model_args(p):
    p.add_argument("--model", choices=("xy", "ising2d"), default="xy")
    p.add_argument("--n", type=int, nargs="+", default=[10], help="chain length(s) for the XY model")
    p.add_argument("--rows", type=int, default=3)
    p.add_argument("--cols", type=int, default=3)
    p.add_argument("--gamma", type=_number_or_sweep, default=1.0,
                   help="anisotropy, or start:stop:count for a sweep")
    p.add_argument("--k", type=int, default=None, help="number of lowest eigenvalues")


def _add_run_args(p):
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")


def build_parser():
    parser = argparse.ArgumentParser(prog="aqcsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="lowest eigenvalues at one parameter point")
    _add_model_args(p)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--s", type=float, default=None, help="schedule parameter instead of --lambda")
    p.add_argument("--schedule", default="linear")
    _add_run_args(p)

    p = sub.add_parser("sweep", help="gaps over a grid of gamma and lambda (or s)")
    _add_model_args(p)
    p.add_argument("--lambda", dest="lam", type=_number_or_sweep, default=None)
    p.add_argument("--s", type=Sweep.parse, default=None, help="start:stop:count")
    p.add_argument("--schedule", default="linear")
    _add_run_args(p)

    p = sub.add_parser("evolve", help="adiabatic sweep with sampled observables")
    _add_model_args(p)
    p.add_argument("--schedule", default="square")
    p.add_argument("--T", dest="total_time", type=float, default=20.0)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--samples", type=int, default=201)
    _add_run_args(p)

    p = sub.add_parser("preset", help="regenerate a figure dataset")
    p.add_argument("name", choices=sorted(PRESETS))
    _add_run_args(p)
    return parser


def config_from_args(args):
    if args.command == "preset":
        return preset(args.name)
    common = dict(model=args.model, n_sites=tuple(args.n), rows=args.rows, cols=args.cols, gamma=args.gamma)
    if args.command in ("spectrum", "sweep"):
        s = args.s
        if args.command == "spectrum" and s is not None:
            s = float(s)
        return ExperimentConfig(
            kind=args.command, lam=args.lam, s=s, schedule=args.schedule,
            k=6 if args.k is None else args.k, **common,
        )
    kind = "fidelity_surface" if isinstance(args.gamma, Sweep) else "evolve"
    return ExperimentConfig(
        kind=kind, schedule=args.schedule, total_time=args.total_time, num_steps=args.steps,
        samples=args.samples, k=0 if args.k is None else args.k, **common,
    )


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        paths = run_experiment(config, args.out, jobs=args.jobs)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"aqcsim: error: {exc}", file=sys.stderr)
        return 1
    for path in paths:
        print(path)
    return 0
