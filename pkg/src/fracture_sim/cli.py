"""``fracture-sim`` command line."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings

from fracture_sim import analytic
from fracture_sim.config import load_scenario
from fracture_sim.errors import FractureSimError


def _g(x: float) -> str:
    return format(x, ".6g")


ANALYTIC_ARITY = {"brazil": 3, "cube": 2, "strength": 3, "ecc": 1}
ANALYTIC_USAGE = {
    "brazil": "brazil N d l        (N in N, d and l in m)",
    "cube": "cube N a [--exact]   (N in N, a in m)",
    "strength": "strength Fult A As   (N, m^2, m^2)",
    "ecc": "ecc es               (es in mm)",
}


def analytic_cmd(kind: str, values: list[str], exact: bool = False, out=None) -> int:
    out = out or sys.stdout
    if kind not in ANALYTIC_ARITY:
        print(f"unknown formula {kind!r}; choose from {', '.join(ANALYTIC_ARITY)}", file=sys.stderr)
        return 2
    if len(values) != ANALYTIC_ARITY[kind]:
        print(f"usage: fracture-sim analytic {ANALYTIC_USAGE[kind]}", file=sys.stderr)
        return 2
    try:
        nums = [float(v) for v in values]
    except ValueError:
        print(f"usage: fracture-sim analytic {ANALYTIC_USAGE[kind]}", file=sys.stderr)
        return 2

    try:
        if kind == "brazil":
            print(f"splitting stress = {_g(analytic.brazilian_stress(*nums))} Pa", file=out)
        elif kind == "cube":
            print(f"cube splitting strength = {_g(analytic.cube_splitting_strength(*nums, exact=exact))} Pa", file=out)
        elif kind == "strength":
            fw, cs = analytic.strength_ratios(*nums)
            print(f"overall strength f'w = {_g(fw)} Pa", file=out)
            print(f"contact stress CS = {_g(cs)} Pa", file=out)
        else:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                val = analytic.eccentricity_strength(nums[0])
            print(f"overall strength f'w = {_g(val)} MPa", file=out)
            for w in caught:
                print(f"note: {w.message} (extrapolated)", file=out)
    except FractureSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def _parse_seeds(text: str) -> list[int]:
    if ".." in text:
        a, b = text.split("..", 1)
        lo, hi = int(a), int(b)
        if hi < lo:
            raise argparse.ArgumentTypeError(f"empty seed range {text}")
        return list(range(lo, hi + 1))
    return [int(v) for v in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracture-sim", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one scenario")
    r.add_argument("--config", required=True)
    r.add_argument("--seed", type=int)
    r.add_argument("--out")

    a = sub.add_parser("analytic", help="closed-form splitting/bearing formulas")
    a.add_argument("kind", choices=sorted(ANALYTIC_ARITY))
    a.add_argument("values", nargs="*")
    a.add_argument("--exact", action="store_true", help="cube: use 2/pi instead of 0.64")

    v = sub.add_parser("validate", help="check a scenario file and print the resolved scenario")
    v.add_argument("--config", required=True)

    e = sub.add_parser("ensemble", help="run a scenario over a range of seeds")
    e.add_argument("--config", required=True)
    e.add_argument("--seeds", required=True, type=_parse_seeds, help="a..b (inclusive) or a,b,c")
    e.add_argument("--out", required=True)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    if args.command == "analytic":
        return analytic_cmd(args.kind, args.values, exact=args.exact)

    try:
        scenario = load_scenario(args.config)
    except FractureSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        print(json.dumps(scenario.to_dict(), indent=2))
        return 0

    from fracture_sim.runner import run_ensemble, run_scenario

    try:
        if args.command == "run":
            if args.seed is not None:
                scenario = scenario.with_seed(args.seed)
            summary, status = run_scenario(scenario, args.out)
            print(
                f"{summary['engine']}: {summary['steps_recorded']} steps, "
                f"peak contact stress {_g(summary['peak_contact_stress_Pa'] or 0.0)} Pa, "
                f"termination {summary['termination']}"
            )
            return status
        summaries, status = run_ensemble(scenario, args.seeds, args.out)
        for s in summaries:
            print(f"seed {s['seed']}: first peak {s['first_peak_contact_stress_Pa']} Pa, {s['termination']}")
        return status
    except OSError as exc:
        print(f"error: {exc.filename or ''}: {exc.strerror}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
