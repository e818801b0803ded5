"""The evaluate / perturb / rebuild loop, single runs and seeded batches."""

from __future__ import annotations

import csv
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from statistics import fmean
from typing import IO, Mapping, Sequence

from .evaluation import FitnessWeights, fitness_scores
from .instance import Instance
from .perturbation import PerturbationParams, perturbation_one, perturbation_two
from .reconstruction import RuleParams, reconstruct
from .roster import CENSORED_COST, DEFAULT_W_DEMAND, CostBreakdown, Schedule, penalty_cost

DEFAULT_MAX_ITERATIONS = 50_000
WITHIN_UNITS = 3


@dataclass(frozen=True)
class SolverParams:
    weights: FitnessWeights = field(default_factory=FitnessWeights)
    perturbation: PerturbationParams = field(default_factory=PerturbationParams)
    rules: RuleParams = field(default_factory=RuleParams)
    w_demand: int = DEFAULT_W_DEMAND
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    target_cost: int | None = None
    seed: int = 0
    trace: bool = False
    # construction-only hook: start empty and skip both elimination steps
    construct_only: bool = False

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.w_demand < 0:
            raise ValueError("w_demand must be >= 0")


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    current: int
    best: int
    eliminated_p1: int
    eliminated_p2: int


@dataclass
class RunReport:
    best_cost: int
    best_penalty: int
    best_schedule: tuple[int, ...]
    breakdown: CostBreakdown
    feasible: bool
    iterations_used: int
    seed: int
    trace: list[TraceRecord] | None = None
    wall_time: float = field(default=0.0, compare=False)

    def to_dict(self, include_timing: bool = True) -> dict:
        out = {
            "best_cost": self.best_cost,
            "best_penalty": self.best_penalty,
            "feasible": self.feasible,
            "preference_total": self.breakdown.preference_total,
            "shortfall_total": self.breakdown.shortfall_total,
            "iterations_used": self.iterations_used,
            "seed": self.seed,
            "best_schedule": list(self.best_schedule),
        }
        if include_timing:
            out["wall_time"] = self.wall_time
        return out


def make_report(
    schedule_or_assignment,
    breakdown: CostBreakdown,
    iterations: int,
    seed: int,
    trace: list[TraceRecord] | None = None,
    wall_time: float = 0.0,
) -> RunReport:
    feasible = breakdown.shortfall_total == 0
    return RunReport(
        best_cost=breakdown.penalty if feasible else CENSORED_COST,
        best_penalty=breakdown.penalty,
        best_schedule=tuple(schedule_or_assignment),
        breakdown=breakdown,
        feasible=feasible,
        iterations_used=iterations,
        seed=seed,
        trace=trace,
        wall_time=wall_time,
    )


def initial_solution(instance: Instance, rng: random.Random) -> Schedule:
    """Uniformly random feasible pattern per nurse, ascending nurse index."""
    schedule = Schedule(instance)
    for i, tab in enumerate(instance.tables):
        schedule.assign_position(i, rng.randrange(len(tab.patterns)))
    return schedule


def chap_solve(instance: Instance, params: SolverParams | None = None) -> RunReport:
    """Run the component-based heuristic once.

    Random draws are consumed in a fixed order: initial patterns (ascending
    nurse), then per iteration the step-I threshold, the step-II draws over
    survivors, and the reconstruction draws.  ``best`` is replaced only on a
    strictly lower penalty of the complete end-of-iteration schedule.
    """
    params = params or SolverParams()
    start = time.perf_counter()
    rng = random.Random(params.seed)
    w_demand = params.w_demand
    target = params.target_cost
    trace: list[TraceRecord] | None = [] if params.trace else None

    if params.construct_only:
        schedule = Schedule(instance)
        best_penalty = None
    else:
        schedule = initial_solution(instance, rng)
        best_penalty = schedule.penalty(w_demand)
    best_assignment = schedule.as_tuple()
    best_breakdown = penalty_cost(schedule, w_demand)

    iterations = 0
    if instance.n == 0:
        return make_report(best_assignment, best_breakdown, 0, params.seed, trace, time.perf_counter() - start)

    weights = params.weights
    pert = params.perturbation
    rules = params.rules
    max_iter = 1 if params.construct_only else params.max_iterations
    while iterations < max_iter:
        if target is not None and best_penalty is not None and best_penalty <= target:
            break
        if params.construct_only:
            e1 = e2 = ()
        else:
            fitness = fitness_scores(schedule, weights)
            e1 = perturbation_one(schedule, fitness, rng)
            e2 = perturbation_two(schedule, pert, rng)
        reconstruct(schedule, rules, rng)
        current = schedule.penalty(w_demand)
        if best_penalty is None or current < best_penalty:
            best_penalty = current
            best_assignment = schedule.as_tuple()
            best_breakdown = penalty_cost(schedule, w_demand)
        iterations += 1
        if trace is not None:
            trace.append(TraceRecord(iterations, current, best_penalty, len(e1), len(e2)))

    return make_report(best_assignment, best_breakdown, iterations, params.seed, trace, time.perf_counter() - start)


@dataclass
class BatchReport:
    name: str
    runs: int
    best: int
    mean: float
    inf: int
    opt: int | None
    within3: int | None
    target: int | None
    reports: list[RunReport] = field(default_factory=list, repr=False)

    def row(self) -> dict:
        return {
            "instance": self.name,
            "runs": self.runs,
            "best": self.best,
            "mean": round(self.mean, 1),
            "inf": self.inf,
            "opt": self.opt,
            "within3": self.within3,
            "target": self.target,
        }


def summarize(name: str, reports: Sequence[RunReport], target: int | None = None) -> BatchReport:
    """Aggregate runs; infeasible runs count with the censored cost."""
    costs = [r.best_cost for r in reports]
    opt = within = None
    if target is not None:
        opt = sum(1 for r in reports if r.feasible and r.best_cost <= target)
        within = sum(1 for r in reports if r.feasible and r.best_cost <= target + WITHIN_UNITS)
    return BatchReport(
        name=name,
        runs=len(reports),
        best=min(costs),
        mean=fmean(costs),
        inf=sum(1 for r in reports if not r.feasible),
        opt=opt,
        within3=within,
        target=target,
        reports=list(reports),
    )


def _run_one(job: tuple[Instance, SolverParams]) -> RunReport:
    instance, params = job
    return chap_solve(instance, params)


def chap_batch(
    instances: Mapping[str, Instance] | Sequence[Instance],
    params: SolverParams | None = None,
    runs_per_instance: int = 20,
    targets: Mapping[str, int] | None = None,
    workers: int = 1,
) -> list[BatchReport]:
    """Run each instance ``runs_per_instance`` times with seeds ``params.seed + r``.

    A known target (optimum) per instance enables early stopping and the
    Opt / Within3 counts.  ``workers > 1`` fans runs out to processes; results
    are ordered by (instance, run) either way.
    """
    if runs_per_instance < 1:
        raise ValueError("runs_per_instance must be >= 1")
    params = params or SolverParams()
    if not isinstance(instances, Mapping):
        instances = {str(i): inst for i, inst in enumerate(instances)}
    targets = targets or {}

    jobs = []
    keys = []
    for name, inst in instances.items():
        target = targets.get(name, params.target_cost)
        for r in range(runs_per_instance):
            jobs.append((inst, replace(params, seed=params.seed + r, target_cost=target)))
            keys.append(name)

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_run_one(job) for job in jobs]

    out = []
    for name in instances:
        reports = [rep for key, rep in zip(keys, results) if key == name]
        out.append(summarize(name, reports, targets.get(name, params.target_cost)))
    return out


def write_trace(trace: Sequence[TraceRecord], sink: IO[str]) -> None:
    writer = csv.writer(sink, delimiter="\t", lineterminator="\n")
    writer.writerow(["iteration", "current", "best", "eliminated_p1", "eliminated_p2"])
    for rec in trace:
        writer.writerow([rec.iteration, rec.current, rec.best, rec.eliminated_p1, rec.eliminated_p2])
