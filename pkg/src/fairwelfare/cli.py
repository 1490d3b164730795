"""Command-line interface.

Subcommands: ``gen``, ``solve``, ``decide``, ``check``, ``export-milp`` and
``bench``, all speaking the documented JSON/CSV/LP file formats.  Exit codes:
0 for success (including "yes"/fair outcomes), 1 for a computed "no",
infeasible or unfair outcome, 2 for usage errors, 3 for resource exhaustion
(enumeration budget or solve timeout).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import bench as bench_mod
from .core import (
    FairnessCriterion,
    SolveTimeout,
    is_fair,
    load_allocation,
    load_instance,
)
from .dp import decide_exists_um_and_fair, solve_um_within
from .gen import (
    MallowsConfig,
    REDUCTION_KINDS,
    ReductionSpec,
    gen_mallows_borda,
    gen_reduction,
    gen_uniform,
)
from .milp import MILP_CRITERIA, build_milp, write_lp
from .oracle import BudgetExceededError, brute_force_um_within, DEFAULT_BUDGET

EXIT_OK = 0
EXIT_NO = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3


def _parse_duration_ns(text: str) -> int:
    """Parse '60s', '500ms', '2m' or a bare number of seconds."""
    text = text.strip().lower()
    units = (("ms", 10**6), ("s", 10**9), ("m", 60 * 10**9))
    for suffix, scale in units:
        if text.endswith(suffix):
            return int(float(text[: -len(suffix)]) * scale)
    return int(float(text) * 10**9)


def _parse_criterion(text: str) -> FairnessCriterion:
    return FairnessCriterion.from_string(text)


def _parse_int_list(text: str) -> tuple[int, ...]:
    if not text.strip():
        return ()
    return tuple(int(part) for part in text.split(","))


def _emit(obj: dict) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")


def _write_json_file(obj: dict, path: str | None) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _cmd_gen(args: argparse.Namespace) -> int:
    if args.model == "mallows":
        cfg = MallowsConfig(args.agents, args.items, Fraction(args.phi), args.seed)
        inst = gen_mallows_borda(cfg)
    elif args.model == "uniform":
        inst = gen_uniform(args.agents, args.items, args.vmax, args.seed)
    else:
        if args.kind is None:
            raise ValueError("--kind is required for --model reduction")
        spec = ReductionSpec(
            kind=args.kind,
            numbers=_parse_int_list(args.payload),
            target=args.target,
            values=_parse_int_list(args.values) if args.values else None,
        )
        inst = gen_reduction(spec)
    _write_json_file(inst.to_json_dict(), args.output)
    return EXIT_OK


def _solve_outcome_dict(outcome) -> dict:
    # Wall-clock time is deliberately absent: stdout must be byte-stable
    # across runs.  Timings are emitted on stderr under --stats.
    return {
        "status": outcome.status,
        "welfare": outcome.welfare,
        "owner": list(outcome.allocation.owner) if outcome.allocation else None,
        "stats": {"states_explored": outcome.stats.states_explored},
    }


def _cmd_solve(args: argparse.Namespace) -> int:
    inst = load_instance(args.instance)
    crit = _parse_criterion(args.criterion)
    timeout_ns = _parse_duration_ns(args.timeout) if args.timeout else None
    if args.engine == "brute":
        outcome = brute_force_um_within(inst, crit, budget=args.budget, timeout_ns=timeout_ns)
    else:
        outcome = solve_um_within(inst, crit, timeout_ns=timeout_ns)
    if args.stats:
        for level, count in enumerate(outcome.stats.states_per_level, start=1):
            sys.stderr.write(json.dumps({"level": level, "states": count}) + "\n")
        sys.stderr.write(json.dumps({"elapsed_ns": outcome.stats.elapsed_ns}) + "\n")
    _emit(_solve_outcome_dict(outcome))
    return EXIT_OK if outcome.found else EXIT_NO


def _cmd_decide(args: argparse.Namespace) -> int:
    inst = load_instance(args.instance)
    crit = _parse_criterion(args.criterion)
    if crit is FairnessCriterion.NONE:
        raise ValueError("decide requires a concrete fairness criterion")
    timeout_ns = _parse_duration_ns(args.timeout) if args.timeout else None
    if args.engine == "brute":
        w0 = brute_force_um_within(inst, FairnessCriterion.NONE, budget=args.budget).welfare
        outcome = brute_force_um_within(inst, crit, budget=args.budget, timeout_ns=timeout_ns)
        w1 = outcome.welfare if outcome.found else None
        answer = w0 == w1
    else:
        answer, w0, w1 = decide_exists_um_and_fair(inst, crit, timeout_ns=timeout_ns)
    _emit({"answer": answer, "w0": w0, "w1": w1})
    return EXIT_OK if answer else EXIT_NO


def _cmd_check(args: argparse.Namespace) -> int:
    inst = load_instance(args.instance)
    alloc = load_allocation(args.allocation)
    crit = _parse_criterion(args.criterion)
    fair = is_fair(inst, alloc, crit)
    _emit({"criterion": crit.value, "fair": fair})
    return EXIT_OK if fair else EXIT_NO


def _cmd_export_milp(args: argparse.Namespace) -> int:
    inst = load_instance(args.instance)
    crit = _parse_criterion(args.criterion)
    if crit not in MILP_CRITERIA:
        raise ValueError(
            f"criterion {crit.value} has no MILP formulation (supported: prop, ef, prop1, ef1)"
        )
    model = build_milp(inst, crit)
    write_lp(model, args.output)
    return EXIT_OK


def _cmd_bench(args: argparse.Namespace) -> int:
    criteria = tuple(_parse_criterion(part) for part in args.criteria.split(","))
    cfg = bench_mod.BenchConfig(
        n_min=args.n_min,
        n_max=args.n_max,
        phis=tuple(float(p) for p in args.phis.split(",")),
        samples=args.samples,
        seed=args.seed,
        engines=tuple(args.engines.split(",")),
        criteria=criteria,
        timeout_ns=_parse_duration_ns(args.timeout),
        milp_cmd=args.milp_cmd,
        workers=args.workers,
    )
    records = bench_mod.run_bench(cfg)
    bench_mod.write_csv(records, args.output)
    ef_rate, prop_rate, ef_known, prop_known = bench_mod.feasibility_rates(records)
    sys.stderr.write(
        f"wrote {len(records)} rows; EF feasible {ef_rate:.1%} of {ef_known}, "
        f"PROP feasible {prop_rate:.1%} of {prop_known}\n"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairwelfare",
        description="Welfare-maximizing fair allocation of indivisible goods.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate an instance JSON file")
    p_gen.add_argument("--model", choices=("mallows", "uniform", "reduction"), required=True)
    p_gen.add_argument("--agents", type=int, default=2, help="number of agents")
    p_gen.add_argument("--items", type=int, default=2, help="number of items")
    p_gen.add_argument("--phi", default="1.0", help="Mallows dispersion in [0,1]")
    p_gen.add_argument("--vmax", type=int, default=10, help="uniform model: max value")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--kind", choices=REDUCTION_KINDS, help="reduction construction")
    p_gen.add_argument("--payload", default="", help="comma-separated integers")
    p_gen.add_argument("--target", type=int, help="threshold for 3-partition/knapsack kinds")
    p_gen.add_argument("--values", default="", help="knapsack item values, comma-separated")
    p_gen.add_argument("-o", "--output", default="-", help="output path (default stdout)")
    p_gen.set_defaults(func=_cmd_gen)

    p_solve = sub.add_parser("solve", help="maximize welfare within a fairness criterion")
    p_solve.add_argument("instance", help="instance JSON path")
    p_solve.add_argument("--criterion", required=True)
    p_solve.add_argument("--engine", choices=("dp", "brute"), default="dp")
    p_solve.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="brute-force budget")
    p_solve.add_argument("--timeout", help="e.g. 60s, 500ms")
    p_solve.add_argument("--stats", action="store_true", help="emit per-level state counts to stderr")
    p_solve.set_defaults(func=_cmd_solve)

    p_decide = sub.add_parser("decide", help="does a welfare-maximal fair allocation exist?")
    p_decide.add_argument("instance")
    p_decide.add_argument("--criterion", required=True)
    p_decide.add_argument("--engine", choices=("dp", "brute"), default="dp")
    p_decide.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p_decide.add_argument("--timeout")
    p_decide.set_defaults(func=_cmd_decide)

    p_check = sub.add_parser("check", help="test an allocation against a criterion")
    p_check.add_argument("instance")
    p_check.add_argument("allocation")
    p_check.add_argument("--criterion", required=True)
    p_check.set_defaults(func=_cmd_check)

    p_milp = sub.add_parser("export-milp", help="write an LP-format model file")
    p_milp.add_argument("instance")
    p_milp.add_argument("--criterion", required=True, help="prop, ef, prop1 or ef1")
    p_milp.add_argument("-o", "--output", required=True, help="LP file path")
    p_milp.set_defaults(func=_cmd_export_milp)

    p_bench = sub.add_parser("bench", help="run the runtime/feasibility sweep")
    p_bench.add_argument("--n-min", type=int, default=2)
    p_bench.add_argument("--n-max", type=int, default=7)
    p_bench.add_argument("--phis", default="0.5,0.75,1.0")
    p_bench.add_argument("--samples", type=int, default=50)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--engines", default="dp")
    p_bench.add_argument("--criteria", default="ef,ef1,prop,prop1")
    p_bench.add_argument("--timeout", default="60s")
    p_bench.add_argument("--workers", type=int, default=1)
    p_bench.add_argument("--milp-cmd", help="external solver command; '{lp}' is the model path")
    p_bench.add_argument("-o", "--output", required=True, help="CSV output path")
    p_bench.set_defaults(func=_cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (BudgetExceededError, SolveTimeout) as exc:
        sys.stderr.write(f"resource error: {exc}\n")
        return EXIT_RESOURCE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
