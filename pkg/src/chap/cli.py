"""``chap`` command line: solve, bench, gen, verify."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .engine import DEFAULT_MAX_ITERATIONS, BatchReport, RunReport, SolverParams, chap_batch, chap_solve, write_trace
from .evaluation import FitnessWeights
from .instance import InstanceError, generate_instance, read_instance, write_instance
from .oracle import SearchSpaceTooLarge, exhaustive_solve
from .perturbation import PerturbationParams
from .reconstruction import DEFAULT_GRADE_WEIGHTS, RuleParams
from .roster import DEFAULT_W_DEMAND, InfeasiblePatternError, evaluate_assignment, load_solution, save_solution

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INFEASIBLE = 2
EXIT_MISMATCH = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("solver parameters")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERATIONS)
    g.add_argument("--rm", type=float, default=0.05, help="step-II elimination rate")
    g.add_argument("--p1", type=float, default=0.80, help="Cover rule rate")
    g.add_argument("--p2", type=float, default=0.18, help="Combined rule rate")
    g.add_argument("--p3", type=float, default=0.02, help="random rule rate")
    g.add_argument("--wp", type=float, default=1.0, help="preference weight in the Combined rule")
    g.add_argument("--wgrade", type=_floats, default=DEFAULT_GRADE_WEIGHTS, help="per-grade cover weights, e.g. 8,2,1")
    g.add_argument("--wdemand", type=int, default=DEFAULT_W_DEMAND, help="penalty per unit of shortfall")
    g.add_argument("--weval", type=_floats, default=(0.5, 0.5), help="fitness weights w_pref[,w_cover]")
    g.add_argument("--target", type=int, default=None, help="stop once the best penalty reaches this value")
    g.add_argument("--cascade", choices=("serviceable", "printed"), default="serviceable")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chap", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve one instance")
    p.add_argument("--instance", required=True, type=Path)
    p.add_argument("--output", type=Path, help="write the run report (JSON) here")
    p.add_argument("--solution", type=Path, help="write the best solution here")
    p.add_argument("--trace", type=Path, help="write a per-iteration TSV trace here")
    p.add_argument("--format", choices=("human", "tsv"), default="human")
    _add_solver_flags(p)

    p = sub.add_parser("bench", help="repeated seeded runs over instances")
    p.add_argument("--instance", required=True, type=Path, nargs="+")
    p.add_argument("--runs", type=int, default=20)
    p.add_argument("--targets", type=Path, help='sidecar file of "instance-name cost" lines')
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output", type=Path)
    p.add_argument("--format", choices=("human", "tsv"), default="human")
    _add_solver_flags(p)

    p = sub.add_parser("gen", help="generate a synthetic instance")
    p.add_argument("--nurses", type=int, default=25)
    p.add_argument("--patterns", type=int, default=411)
    p.add_argument("--grades", type=int, default=3)
    p.add_argument("--tightness", type=float, default=0.8)
    p.add_argument("--feasible-min", type=int)
    p.add_argument("--feasible-max", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", type=Path, required=True)

    p = sub.add_parser("verify", help="check a solution file")
    p.add_argument("--instance", required=True, type=Path)
    p.add_argument("--solution", required=True, type=Path)
    p.add_argument("--oracle", action="store_true", help="also require optimality via exhaustive search")
    p.add_argument("--wdemand", type=int, default=None)
    return parser


def params_from_args(args: argparse.Namespace) -> SolverParams:
    weval = args.weval
    w_pref = weval[0]
    w_cover = weval[1] if len(weval) > 1 else 1.0 - w_pref
    return SolverParams(
        weights=FitnessWeights(w_pref, w_cover),
        perturbation=PerturbationParams(args.rm),
        rules=RuleParams(args.p1, args.p2, args.p3, w_p=args.wp, w_grade=tuple(args.wgrade), cascade=args.cascade),
        w_demand=args.wdemand,
        max_iterations=args.max_iters,
        target_cost=args.target,
        seed=args.seed,
        trace=getattr(args, "trace", None) is not None,
    )


def _fix_grade_weights(params: SolverParams, grades: int) -> SolverParams:
    # default weights are for three grades; adapt them when the instance differs
    if params.rules.w_grade == DEFAULT_GRADE_WEIGHTS and grades != len(DEFAULT_GRADE_WEIGHTS):
        return replace(params, rules=replace(params.rules, w_grade=None))
    return params


def read_targets(path: Path) -> dict[str, int]:
    targets = {}
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'instance-name cost'")
        targets[parts[0]] = int(parts[1])
    return targets


def format_run(report: RunReport, fmt: str) -> str:
    d = report.to_dict(include_timing=False)
    if fmt == "tsv":
        keys = ["best_cost", "best_penalty", "feasible", "preference_total", "shortfall_total", "iterations_used", "seed"]
        return "\t".join(keys) + "\n" + "\t".join(str(d[k]) for k in keys) + "\n"
    status = "feasible" if report.feasible else "INFEASIBLE (censored)"
    return (
        f"best cost     {report.best_cost}  [{status}]\n"
        f"penalty       {report.best_penalty} = {report.breakdown.preference_total} preference"
        f" + shortfall {report.breakdown.shortfall_total}\n"
        f"iterations    {report.iterations_used}\n"
        f"seed          {report.seed}\n"
    )


def format_batch(rows: Sequence[BatchReport], fmt: str) -> str:
    cols = ["instance", "runs", "best", "mean", "inf", "opt", "within3"]
    table = []
    for b in rows:
        r = b.row()
        table.append([str(r[c]) if r[c] is not None else "N/A" for c in cols])
    if fmt == "tsv":
        return "\n".join("\t".join(line) for line in [cols, *table]) + "\n"
    header = ["Instance", "Runs", "Best", "Mean", "Inf", "#", "<=3"]
    widths = [max(len(h), *(len(line[i]) for line in table)) if table else len(h) for i, h in enumerate(header)]
    out = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    out += ["  ".join(v.rjust(w) for v, w in zip(line, widths)) for line in table]
    return "\n".join(out) + "\n"


def _emit(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def run_solve(args: argparse.Namespace) -> int:
    instance = read_instance(args.instance)
    params = _fix_grade_weights(params_from_args(args), instance.grades)
    report = chap_solve(instance, params)
    sys.stdout.write(format_run(report, args.format))
    if args.output is not None:
        doc = report.to_dict()
        doc["instance"] = str(args.instance)
        args.output.write_text(json.dumps(doc, indent=2) + "\n")
    if args.solution is not None:
        with open(args.solution, "w") as fh:
            save_solution(report.best_schedule, report.breakdown, params.w_demand, fh)
    if args.trace is not None and report.trace is not None:
        with open(args.trace, "w") as fh:
            write_trace(report.trace, fh)
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def run_bench(args: argparse.Namespace) -> int:
    instances = {}
    for path in args.instance:
        instances[path.stem] = read_instance(path)
    targets = read_targets(args.targets) if args.targets else {}
    params = params_from_args(args)
    grades = {inst.grades for inst in instances.values()}
    if len(grades) == 1:
        params = _fix_grade_weights(params, grades.pop())
    rows = chap_batch(instances, params, args.runs, targets=targets, workers=args.workers)
    _emit(format_batch(rows, args.format), args.output)
    return EXIT_OK


def run_gen(args: argparse.Namespace) -> int:
    feasible_range = None
    if args.feasible_min is not None or args.feasible_max is not None:
        lo = args.feasible_min if args.feasible_min is not None else 1
        hi = args.feasible_max if args.feasible_max is not None else max(lo, args.patterns // 4)
        feasible_range = (lo, hi)
    instance = generate_instance(
        args.nurses, args.patterns, args.grades, args.tightness, args.seed, feasible_range=feasible_range
    )
    write_instance(instance, args.output)
    return EXIT_OK


def run_verify(args: argparse.Namespace) -> int:
    instance = read_instance(args.instance)
    with open(args.solution) as fh:
        mapping, claimed = load_solution(fh)
    w_demand = args.wdemand if args.wdemand is not None else int(claimed.get("w_demand", DEFAULT_W_DEMAND))

    problems = []
    missing = [i for i in range(instance.n) if i not in mapping]
    extra = sorted(set(mapping) - set(range(instance.n)))
    if missing:
        problems.append(f"nurses without a pattern: {missing}")
    if extra:
        problems.append(f"unknown nurse ids: {extra}")
    for i in range(instance.n):
        j = mapping.get(i)
        if j is not None and j not in instance.nurses[i].preference_cost:
            problems.append(f"nurse {i}: pattern {j} is not in the feasible set")
    if problems:
        for line in problems:
            print(f"FAIL {line}", file=sys.stderr)
        return EXIT_MISMATCH

    assignment = [mapping[i] for i in range(instance.n)]
    try:
        cost = evaluate_assignment(instance, assignment, w_demand)
    except InfeasiblePatternError as exc:
        print(f"FAIL {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    for key in ("preference_total", "shortfall_total", "penalty"):
        if key in claimed and int(claimed[key]) != getattr(cost, key):
            problems.append(f"{key}: claimed {claimed[key]}, recomputed {getattr(cost, key)}")

    if args.oracle:
        try:
            best = exhaustive_solve(instance, w_demand)
        except SearchSpaceTooLarge as exc:
            print(f"oracle skipped: {exc}")
        else:
            if cost.penalty != best.optimal_cost:
                problems.append(f"penalty {cost.penalty} is not optimal (oracle optimum {best.optimal_cost})")
            else:
                print(f"oracle: optimal ({best.optimal_cost})")

    if problems:
        for line in problems:
            print(f"FAIL {line}", file=sys.stderr)
        return EXIT_MISMATCH
    print(f"OK penalty {cost.penalty} (preference {cost.preference_total}, shortfall {cost.shortfall_total})")
    return EXIT_OK


COMMANDS = {"solve": run_solve, "bench": run_bench, "gen": run_gen, "verify": run_verify}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (OSError, InstanceError, ValueError) as exc:
        print(f"chap {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
