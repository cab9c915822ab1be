"""Command-line interface: ``multibubble {profile,check,optimize,homology}``.

Exit codes: 0 success, 1 a check failed, 2 usage or schema error,
3 argument outside the mathematical domain.  MULTIBUBBLE_SEED overrides
``--seed``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import serialize
from .checks import run_suite
from .errors import ClosureError, ConvergenceError, MultibubbleError
from .gauss import McSpec, QuadratureSpec
from .homology import IncidenceComplex, build_complex, homology_ranks
from .optimizer import OptProblem, compare_to_model, minimize_perimeter
from .profile import model_profile

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2, 3
SUM_SLACK = 1e-6


class UsageError(Exception):
    pass


class DomainArgError(Exception):
    pass


def parse_measure(text: str) -> np.ndarray:
    """Parse "0.5,0.3,0.2"; renormalise if the sum is within 1e-6 of 1."""
    try:
        v = np.array([float(t) for t in text.split(",")], dtype=float)
    except ValueError as exc:
        raise UsageError(f"cannot parse measure vector {text!r}") from exc
    if v.size < 2 or not np.all(np.isfinite(v)):
        raise UsageError(f"measure vector needs at least two finite entries: {text!r}")
    if abs(v.sum() - 1.0) > SUM_SLACK:
        raise UsageError(f"measure vector sums to {v.sum():.9g}, not 1")
    if v.min() <= 0:
        raise DomainArgError(f"measure vector must be strictly interior: {text!r}")
    return v / v.sum()


def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=42, help="RNG seed (MULTIBUBBLE_SEED overrides)")
    p.add_argument("--mc-samples", type=int, default=1_000_000)
    p.add_argument("--quad-tol", type=float, default=1e-11)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", type=Path, default=None, help="write here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multibubble", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="model profile I_m(v) with gradient and Hessian")
    p.add_argument("--v", required=True, help="comma-separated cell measures")
    _common(p)

    p = sub.add_parser("check", help="run the identity suite for q cells")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--samples", type=int, default=3, help="random points per identity")
    _common(p)

    p = sub.add_parser("optimize", help="minimise perimeter over pull-back clusters")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--v", required=True)
    p.add_argument("--starts", type=int, default=5)
    p.add_argument("--history", type=Path, default=None, help="history CSV path (default: next to --output)")
    _common(p)

    p = sub.add_parser("homology", help="Betti numbers of an incidence complex given as JSON")
    p.add_argument("input", help="JSON file, or - for stdin")
    _common(p)
    return parser


def _seed(args) -> int:
    env = os.environ.get("MULTIBUBBLE_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise UsageError(f"MULTIBUBBLE_SEED is not an integer: {env!r}") from exc
    return args.seed


def _emit(args, payload: dict):
    text = serialize.to_csv(payload) if args.format == "csv" else serialize.to_json(payload)
    if args.output is None:
        sys.stdout.write(text)
    else:
        args.output.write_text(text)


def cmd_profile(args) -> int:
    v = parse_measure(args.v)
    rep = model_profile(v, spec=QuadratureSpec(abs_tol=args.quad_tol))
    _emit(args, rep.to_dict())
    return EXIT_OK


def cmd_check(args) -> int:
    if not 2 <= args.q <= 6:
        raise UsageError(f"check supports 2 <= q <= 6, got {args.q}")
    results = run_suite(args.q, seed=_seed(args), mc_samples=args.mc_samples,
                        spec=QuadratureSpec(abs_tol=args.quad_tol), samples=args.samples)
    for r in results:
        print(r.line(), file=sys.stderr)
    payload = {
        "q": args.q,
        "passed": all(r.passed for r in results),
        "checks": [{"name": r.name, "passed": r.passed, "value": r.value, "tol": r.tol} for r in results],
    }
    _emit(args, payload)
    return EXIT_OK if payload["passed"] else EXIT_CHECK


def cmd_optimize(args) -> int:
    if not 2 <= args.q <= args.n + 1:
        raise UsageError(f"q={args.q}, n={args.n} is outside 2 <= q <= n + 1, where simplicial clusters "
                         "are known to be the minimisers; refusing to run")
    v = parse_measure(args.v)
    if v.size != args.q:
        raise UsageError(f"--v has {v.size} entries but q={args.q}")
    prob = OptProblem(args.q, args.n, v, n_starts=args.starts, mc=McSpec(min(args.mc_samples, 200_000), _seed(args)))
    try:
        res = minimize_perimeter(prob)
    except ConvergenceError as exc:
        print(f"optimizer did not converge: {exc}", file=sys.stderr)
        return EXIT_CHECK
    cmp = compare_to_model(res)
    S = build_complex(res.cluster)
    b0, b1 = homology_ranks(S)
    payload = {
        "q": args.q,
        "n": args.n,
        "v": v,
        "perimeter": res.perimeter,
        "profile_value": res.profile_value,
        "profile_gap": res.profile_gap,
        "measure_error": res.measure_error,
        "isometry_defect": res.isometry_defect,
        "measures": res.measures,
        "areas": res.areas,
        "model_areas": cmp.model_areas,
        "max_area_deviation": cmp.max_deviation,
        "all_interfaces_nonempty": cmp.all_positive,
        "B": res.B,
        "lambda": res.lam,
        "complex": {**S.to_json(), "b0": b0, "b1": b1},
        "starts": [{"start": s, "perimeter": p, "measure_error": e, "isometry_defect": d} for s, p, e, d in res.starts],
    }
    _emit(args, payload)
    hist_path = args.history
    if hist_path is None and args.output is not None:
        hist_path = args.output.with_name(args.output.name + ".history.csv")
    if hist_path is not None:
        hist_path.write_text(serialize.history_csv(res.history))
    return EXIT_OK


def cmd_homology(args) -> int:
    try:
        text = sys.stdin.read() if args.input == "-" else Path(args.input).read_text()
        data = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read complex: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("complex JSON must be an object")
    S = IncidenceComplex.from_json(data)
    b0, b1 = homology_ranks(S)
    _emit(args, {"b0": b0, "b1": b1})
    return EXIT_OK


COMMANDS = {"profile": cmd_profile, "check": cmd_check, "optimize": cmd_optimize, "homology": cmd_homology}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ClosureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainArgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except MultibubbleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
