"""Command-line front end: generation, solving, verification, stability lab.

One solve per invocation; reports are JSON (validated by the schema shipped
with the package), label/stability dumps are CSV.  Exit codes: 0 success,
1 check-failed (verify/compare), 2 usage, 3 validation, 4 solver failure,
5 cap exceeded.  Set PERSUADE_LOG to a level name for diagnostics.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from typing import Optional

import numpy as np

from . import __version__
from .arrangement import Hyperplane, enumerate_cells, solve_fpt
from .bicriteria import DEFAULT_GRID_CAP, solve_bicriteria
from .cce import crossvalidate_equivalence, solve_cce_cutting
from .errors import (
    CapExceededError,
    PersuadeError,
    SolverError,
    ValidationError,
)
from .exact import solve_cce_exact, solve_persuasive_exact
from .generators import (
    example_degenerate_instance,
    random_auction_instance,
    random_cut_objective,
    random_coverage_objective,
    random_monotone_submodular_table,
    random_reduction_spec,
    random_submodular_table,
    random_uniform_instance,
    supermodular_indicator_instance,
)
from .model import PersuasionInstance, validate_instance, verify_scheme
from .serialize import (
    auction_from_dict,
    auction_to_dict,
    dumps,
    instance_from_dict,
    instance_to_dict,
    objective_to_dict,
    reduction_from_dict,
    reduction_to_dict,
    scheme_from_dict,
    scheme_to_dict,
)
from .setfuncs import ExplicitTable
from .stability import verify_stability_bounds

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_VALIDATION = 3
EXIT_SOLVER = 4
EXIT_CAP = 5

logger = logging.getLogger(__name__)


def _configure_logging() -> None:
    level = os.environ.get("PERSUADE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _write_out(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _report(
    solver: str,
    parameters: dict,
    started: float,
    value: Optional[float] = None,
    scheme=None,
    persuasiveness=None,
    seed: Optional[int] = None,
    extra: Optional[dict] = None,
    status: str = "ok",
) -> dict:
    return {
        "solver": solver,
        "status": status,
        "value": value,
        "scheme": scheme_to_dict(scheme) if scheme is not None else None,
        "persuasiveness": persuasiveness.to_dict() if persuasiveness is not None else None,
        "wall_time_s": time.perf_counter() - started,
        "parameters": parameters,
        "seed": seed,
        "extra": extra,
    }


def _load_instance(path: str, eps_mode: bool = False) -> PersuasionInstance:
    inst = instance_from_dict(_load_json(path))
    result = validate_instance(inst, eps_mode=eps_mode)
    if not result.ok:
        raise ValidationError("; ".join(result.violations))
    return inst


def cmd_gen(args) -> int:
    seed = args.seed
    if args.kind == "random-uniform":
        payload = instance_to_dict(
            random_uniform_instance(
                args.n, args.states, seed, objective_kind=args.objective,
                per_state=args.per_state,
            )
        )
    elif args.kind == "example-3-1":
        payload = instance_to_dict(example_degenerate_instance(args.n))
    elif args.kind == "cce-reduction":
        payload = reduction_to_dict(random_reduction_spec(args.n, seed))
    elif args.kind == "supermodular-indicator":
        payload = objective_to_dict(supermodular_indicator_instance(args.n))
    elif args.kind == "random-coverage":
        payload = instance_to_dict(
            random_uniform_instance(args.n, args.states, seed, objective_kind="coverage")
        )
    elif args.kind == "random-cut":
        payload = instance_to_dict(
            random_uniform_instance(args.n, args.states, seed, objective_kind="cut")
        )
    elif args.kind == "random-auction":
        payload = auction_to_dict(
            random_auction_instance(args.n, args.states, args.types, seed)
        )
    else:
        raise ValidationError(f"unknown generator kind {args.kind!r}")
    _write_out(dumps(payload), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    started = time.perf_counter()
    inst = instance_from_dict(_load_json(args.instance))
    result = validate_instance(inst, eps_mode=args.eps_mode)
    report = _report(
        "validate",
        {"instance": args.instance, "eps_mode": args.eps_mode},
        started,
        extra={"ok": result.ok, "violations": list(result.violations)},
        status="ok" if result.ok else "failed",
    )
    _write_out(dumps(report), args.out)
    return EXIT_OK if result.ok else EXIT_VALIDATION


def cmd_verify(args) -> int:
    started = time.perf_counter()
    inst = _load_instance(args.instance, eps_mode=args.mode == "eps")
    scheme = scheme_from_dict(_load_json(args.scheme), allow_duplicate_signals=True)
    report_obj, passed = verify_scheme(inst, scheme, mode=args.mode, eps=args.eps)
    report = _report(
        "verify",
        {"instance": args.instance, "scheme": args.scheme, "mode": args.mode,
         "eps": args.eps},
        started,
        value=report_obj.sender_value,
        persuasiveness=report_obj,
        status="ok" if passed else "failed",
    )
    _write_out(dumps(report), args.out)
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def _solve_and_report(args, solver: str, runner, mode: str, eps: float = 0.0) -> int:
    started = time.perf_counter()
    inst = _load_instance(args.instance, eps_mode=mode == "eps")
    scheme, value = runner(inst)
    persuasiveness, passed = verify_scheme(inst, scheme, mode=mode, eps=eps)
    if not passed:
        raise SolverError(f"{solver} emitted a scheme its own verifier rejects")
    report = _report(
        solver,
        {"instance": args.instance, **getattr(args, "_params", {})},
        started,
        value=value,
        scheme=scheme,
        persuasiveness=persuasiveness,
        seed=getattr(args, "seed", None),
    )
    _write_out(dumps(report), args.out)
    return EXIT_OK


def cmd_solve_exact(args) -> int:
    args._params = {"mode": args.mode, "eps": args.eps}
    eps = args.eps if args.mode == "eps" else 0.0
    return _solve_and_report(
        args,
        "solve-exact",
        lambda inst: solve_persuasive_exact(inst, mode=args.mode, eps=eps),
        mode=args.mode,
        eps=eps,
    )


def cmd_solve_fpt(args) -> int:
    return _solve_and_report(args, "solve-fpt", solve_fpt, mode="exact")


def cmd_solve_bicriteria(args) -> int:
    delta = args.delta if args.delta is not None else args.eps
    args._params = {"eps": args.eps, "delta": delta, "grid_cap": args.grid_cap}
    # assembly introduces one extra rounding step over the LP tolerance
    return _solve_and_report(
        args,
        "solve-bicriteria",
        lambda inst: solve_bicriteria(inst, args.eps, delta=delta, grid_cap=args.grid_cap),
        mode="eps",
        eps=args.eps + 1e-7,
    )


def cmd_solve_cce(args) -> int:
    args._params = {"method": args.method}
    runner = solve_cce_exact if args.method == "exact" else solve_cce_cutting
    return _solve_and_report(args, "solve-cce", lambda inst: runner(inst), mode="cce")


def cmd_cells(args) -> int:
    inst = _load_instance(args.instance)
    planes = [Hyperplane(tuple(inst.payoff[i, :]), 0.0) for i in range(inst.n)]
    cells = enumerate_cells(planes, box_radius=1.0)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(
        ["label"] + [f"witness_{s}" for s in inst.states]
    )
    for cell in cells:
        writer.writerow(
            ["".join(map(str, cell.label))] + [repr(float(v)) for v in cell.witness]
        )
    _write_out(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_solve_auction(args) -> int:
    started = time.perf_counter()
    from .auction import solve_auction

    inst = auction_from_dict(_load_json(args.auction))
    scheme, revenue = solve_auction(inst, literal_objective=args.paper_literal_objective)
    report = _report(
        "solve-auction",
        {"auction": args.auction, "literal_objective": args.paper_literal_objective},
        started,
        value=revenue,
        extra={
            "outcomes": [list(map(list, o.rankings)) for o in scheme.outcomes],
            "probs": [[float(v) for v in row] for row in scheme.probs],
        },
    )
    _write_out(dumps(report), args.out)
    return EXIT_OK


def cmd_cce_reduction(args) -> int:
    started = time.perf_counter()
    spec = reduction_from_dict(_load_json(args.spec))
    result = crossvalidate_equivalence(spec)
    report = _report(
        "cce-reduction",
        {"spec": args.spec},
        started,
        value=result.cce_value,
        extra={
            "wm_value": result.wm_value,
            "half_wm_value": 0.5 * result.wm_value,
            "marginals": list(result.marginals),
            "marginal_feasible": result.marginal_feasible,
            "ok": result.ok,
            "message": result.message,
        },
        status="ok" if result.ok else "failed",
    )
    _write_out(dumps(report), args.out)
    return EXIT_OK if result.ok else EXIT_CHECK_FAILED


def cmd_stability(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.function == "cut":
        f = ExplicitTable(tuple(random_cut_objective(args.n, rng).table()))
    elif args.function == "coverage":
        f = ExplicitTable(tuple(random_coverage_objective(args.n, rng).table()))
    elif args.function == "monotone-submodular":
        f = random_monotone_submodular_table(args.n, rng)
    elif args.function == "submodular":
        f = random_submodular_table(args.n, rng)
    elif args.function == "supermodular-indicator":
        f = supermodular_indicator_instance(args.n)
    else:
        raise ValidationError(f"unknown stability function {args.function!r}")
    report = verify_stability_bounds(f, args.trials, args.seed, threads=args.threads)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["subset", "eps", "lp_min", "bound", "ratio"])
    for t in report.trials:
        writer.writerow(
            ["".join(map(str, t.subset.bits)), f"{t.eps!r}", f"{t.lp_min!r}",
             f"{t.bound!r}", f"{t.ratio!r}"]
        )
    _write_out(buf.getvalue(), args.out)
    if not report.ok:
        logger.error("stability bound violated; min ratio %.6f", report.min_ratio)
        return EXIT_CHECK_FAILED
    return EXIT_OK


_SOLVERS = {
    "exact": lambda inst: solve_persuasive_exact(inst),
    "fpt": solve_fpt,
    "cce-exact": lambda inst: solve_cce_exact(inst),
    "cce-cutting": solve_cce_cutting,
}


def cmd_compare(args) -> int:
    started = time.perf_counter()
    inst = _load_instance(args.instance)
    names = args.solvers.split(",")
    if len(names) != 2 or any(s not in _SOLVERS for s in names):
        raise ValidationError(
            f"--solvers wants two of {sorted(_SOLVERS)}, got {args.solvers!r}"
        )
    values = {}
    for name in names:
        _, values[name] = _SOLVERS[name](inst)
    diff = abs(values[names[0]] - values[names[1]])
    agree = diff <= args.tol
    report = _report(
        "compare",
        {"instance": args.instance, "solvers": names, "tol": args.tol},
        started,
        value=values[names[0]],
        extra={"values": values, "difference": diff, "agree": agree},
        status="ok" if agree else "failed",
    )
    _write_out(dumps(report), args.out)
    return EXIT_OK if agree else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="persuade",
        description="Optimal and approximate public signaling solvers",
    )
    parser.add_argument("--version", action="version", version=f"persuade {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_out(p):
        p.add_argument("--out", help="write output to this file instead of stdout")

    p = sub.add_parser("gen", help="generate instance/spec JSON")
    p.add_argument("--kind", required=True,
                   choices=["random-uniform", "example-3-1", "cce-reduction",
                            "supermodular-indicator", "random-coverage",
                            "random-cut", "random-auction"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--states", type=int, default=2)
    p.add_argument("--types", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--objective", default="additive",
                   choices=["additive", "anonymous", "coverage", "cut", "explicit"])
    p.add_argument("--per-state", action="store_true",
                   help="independent explicit objective per state")
    add_out(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("validate", help="check instance invariants")
    p.add_argument("instance")
    p.add_argument("--eps-mode", action="store_true",
                   help="also require payoffs in [-1, 1]")
    add_out(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("verify", help="verify a scheme against an instance")
    p.add_argument("instance")
    p.add_argument("--scheme", required=True)
    p.add_argument("--mode", default="exact", choices=["exact", "eps", "cce"])
    p.add_argument("--eps", type=float, default=0.0)
    add_out(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("solve-exact", help="exhaustive persuasive solver")
    p.add_argument("instance")
    p.add_argument("--mode", default="exact", choices=["exact", "eps"])
    p.add_argument("--eps", type=float, default=0.0)
    add_out(p)
    p.set_defaults(func=cmd_solve_exact)

    p = sub.add_parser("solve-fpt", help="arrangement-based persuasive solver")
    p.add_argument("instance")
    add_out(p)
    p.set_defaults(func=cmd_solve_fpt)

    p = sub.add_parser("cells", help="CSV of arrangement labels and witnesses")
    p.add_argument("instance")
    add_out(p)
    p.set_defaults(func=cmd_cells)

    p = sub.add_parser("solve-bicriteria", help="grid-based eps-persuasive solver")
    p.add_argument("instance")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--grid-cap", type=int, default=DEFAULT_GRID_CAP)
    add_out(p)
    p.set_defaults(func=cmd_solve_bicriteria)

    p = sub.add_parser("solve-cce", help="cce-persuasive solver")
    p.add_argument("instance")
    p.add_argument("--method", default="cutting", choices=["exact", "cutting"])
    add_out(p)
    p.set_defaults(func=cmd_solve_cce)

    p = sub.add_parser("cce-reduction", help="cross-validate the cce reduction")
    p.add_argument("--spec", required=True)
    add_out(p)
    p.set_defaults(func=cmd_cce_reduction)

    p = sub.add_parser("solve-auction", help="second-price auction signaling")
    p.add_argument("auction")
    p.add_argument("--paper-literal-objective", action="store_true",
                   help="drop the type-probability weighting from the objective")
    add_out(p)
    p.set_defaults(func=cmd_solve_auction)

    p = sub.add_parser("stability", help="noise-stability lab (CSV)")
    p.add_argument("--function", required=True,
                   choices=["cut", "coverage", "monotone-submodular", "submodular",
                            "supermodular-indicator"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    add_out(p)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("compare", help="run two solvers and compare values")
    p.add_argument("instance")
    p.add_argument("--solvers", default="exact,fpt")
    p.add_argument("--tol", type=float, default=1e-6)
    add_out(p)
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CapExceededError as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except PersuadeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"bad input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
