import io
import random
from collections import Counter
from dataclasses import replace

import pytest

from chap.engine import (
    BatchReport,
    SolverParams,
    chap_batch,
    chap_solve,
    initial_solution,
    summarize,
    write_trace,
)
from chap.evaluation import FitnessWeights, fitness_scores
from chap.instance import generate_instance, generate_with_witness, make_instance
from chap.oracle import exhaustive_solve, greedy_construct
from chap.perturbation import PerturbationParams, perturbation_one, perturbation_two
from chap.reconstruction import RuleParams, reconstruct
from chap.roster import CENSORED_COST
from helpers import brute_penalty, days

# chi-square 0.99 quantile, 3 degrees of freedom
CHI2_99_DF3 = 11.345


def tiny(seed, n=5):
    return generate_instance(n, 24, 3, 0.8, seed, feasible_range=(3, 8))


def test_singleton_feasible_sets():
    inst = make_instance(1, [days(0), days(1)], [(1, {1: 4}), (1, {0: 2})], [[0]] * 14)
    assert initial_solution(inst, random.Random(5)).assignment == [1, 0]


def test_initial_solution_reproducible(small_instance):
    a = initial_solution(small_instance, random.Random(42)).assignment
    b = initial_solution(small_instance, random.Random(42)).assignment
    assert a == b


def test_initial_solution_uniform():
    inst = make_instance(1, [days(k) for k in range(4)], [(1, {k: 0 for k in range(4)})], [[0]] * 14)
    trials = 10_000
    counts = Counter(initial_solution(inst, random.Random(seed)).assignment[0] for seed in range(trials))
    chi2 = sum((counts[j] - trials / 4) ** 2 / (trials / 4) for j in range(4))
    assert chi2 < CHI2_99_DF3


@pytest.mark.parametrize("seed", range(5))
def test_reaches_oracle_target(seed):
    # witness is shortfall-free and, with its patterns at cost 0, globally cheapest
    base, witness = generate_with_witness(6, 30, 3, 0.8, 8 + seed, feasible_range=(4, 8))
    inst = make_instance(
        base.grades,
        [p.to_string() for p in base.patterns],
        [(n.grade, {j: 0 if j == w else max(c, 1) for j, c in n.preference_cost.items()}) for n, w in zip(base.nurses, witness)],
        base.demand,
    )
    best = exhaustive_solve(inst)
    assert best.feasible and best.optimal_cost == 0
    report = chap_solve(inst, SolverParams(seed=3, target_cost=best.optimal_cost))
    assert report.feasible
    assert report.best_cost == best.optimal_cost
    assert report.iterations_used < 50_000
    assert brute_penalty(inst, report.best_schedule)[0] == report.best_penalty


def test_single_iteration_loop_contract(small_instance):
    params = SolverParams(seed=17, max_iterations=1, trace=True)
    report = chap_solve(small_instance, params)
    assert report.iterations_used == 1

    rng = random.Random(17)
    sched = initial_solution(small_instance, rng)
    start = sched.penalty()
    fitness = fitness_scores(sched, FitnessWeights())
    e1 = perturbation_one(sched, fitness, rng)
    e2 = perturbation_two(sched, PerturbationParams(), rng)
    reconstruct(sched, RuleParams(), rng)
    after = sched.penalty()
    assert report.trace[0].current == after
    assert report.trace[0].eliminated_p1 == len(e1)
    assert report.trace[0].eliminated_p2 == len(e2)
    assert report.best_penalty == min(start, after)
    assert chap_solve(small_instance, params) == report


def test_tiny_batch_mostly_optimal():
    hits = total = 0
    for s in range(10):
        inst = tiny(300 + s, n=3 + s % 4)
        opt = exhaustive_solve(inst).optimal_cost
        for seed in range(20):
            r = chap_solve(inst, SolverParams(seed=seed, target_cost=opt))
            hits += r.best_penalty == opt
            total += 1
    assert hits >= 0.9 * total


def test_best_monotone_and_iterations_complete(small_instance):
    report = chap_solve(small_instance, SolverParams(seed=1, max_iterations=300, trace=True))
    bests = [t.best for t in report.trace]
    assert bests == sorted(bests, reverse=True)
    assert all(t.current >= t.best for t in report.trace)
    assert len(report.trace) == 300
    assert None not in report.best_schedule


def test_fixed_point_without_perturbation():
    inst = make_instance(1, [days(0), days(1)], [(1, {0: 5, 1: 5})] * 3, [[1], [1]] + [[0]] * 12)
    params = SolverParams(
        weights=FitnessWeights(1.0, 0.0),
        perturbation=PerturbationParams(0.0),
        seed=2,
        max_iterations=50,
        trace=True,
    )
    report = chap_solve(inst, params)
    assert all(t.eliminated_p1 == 0 and t.eliminated_p2 == 0 for t in report.trace)
    assert len({t.current for t in report.trace}) == 1


def test_construct_only_hook_matches_greedy(small_instance):
    for seed in range(10):
        hooked = chap_solve(small_instance, SolverParams(seed=seed, construct_only=True))
        greedy = greedy_construct(small_instance, RuleParams(), seed)
        assert hooked.best_schedule == greedy.best_schedule
        assert hooked.breakdown == greedy.breakdown
        assert hooked.iterations_used == greedy.iterations_used == 1


def test_empty_instance():
    inst = generate_instance(0, 3, 3, 0.5, 0)
    report = chap_solve(inst, SolverParams())
    assert report.feasible and report.best_cost == 0 and report.iterations_used == 0


def test_infeasible_run_is_censored():
    inst = make_instance(1, [days(0)], [(1, {0: 3})], [[2]] + [[0]] * 13)
    report = chap_solve(inst, SolverParams(max_iterations=5))
    assert not report.feasible
    assert report.best_cost == CENSORED_COST
    assert report.best_penalty == 3 + 200


def test_batch_single_run_best_equals_mean(small_instance):
    (row,) = chap_batch([small_instance], SolverParams(max_iterations=50), runs_per_instance=1)
    assert row.best == row.mean
    assert row.opt is None and row.within3 is None


def test_batch_all_infeasible_mean_censored():
    inst = make_instance(1, [days(0)], [(1, {0: 3})], [[2]] + [[0]] * 13)
    (row,) = chap_batch({"x": inst}, SolverParams(max_iterations=3), runs_per_instance=4, targets={"x": 3})
    assert row.inf == 4
    assert row.mean == CENSORED_COST
    assert row.opt == 0 and row.within3 == 0


def test_batch_seeds_and_counts(small_instance):
    opt = exhaustive_solve(small_instance).optimal_cost
    (row,) = chap_batch({"s": small_instance}, SolverParams(seed=10, max_iterations=2000), 5, targets={"s": opt})
    assert [r.seed for r in row.reports] == [10, 11, 12, 13, 14]
    assert row.inf + sum(r.feasible for r in row.reports) == row.runs
    assert row.opt <= row.within3 <= row.runs


def test_serial_and_parallel_batches_identical():
    instances = {f"i{s}": tiny(400 + s) for s in range(3)}
    params = SolverParams(max_iterations=200)
    serial = chap_batch(instances, params, 4)
    parallel = chap_batch(instances, params, 4, workers=2)
    assert [b.row() for b in serial] == [b.row() for b in parallel]
    assert [b.reports for b in serial] == [b.reports for b in parallel]


def test_summarize_within_three():
    reports = [chap_solve(tiny(1), SolverParams(seed=s, max_iterations=20)) for s in range(3)]
    forged = [replace(r, best_cost=c, feasible=True) for r, c in zip(reports, (10, 12, 14))]
    row = summarize("x", forged, target=10)
    assert (row.best, row.opt, row.within3) == (10, 1, 2)
    assert isinstance(row, BatchReport)


def test_trace_output_is_tab_delimited(small_instance):
    report = chap_solve(small_instance, SolverParams(max_iterations=3, trace=True))
    buf = io.StringIO()
    write_trace(report.trace, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].split("\t") == ["iteration", "current", "best", "eliminated_p1", "eliminated_p2"]
    assert len(lines) == 4


def test_params_validated():
    with pytest.raises(ValueError):
        SolverParams(max_iterations=0)
    with pytest.raises(ValueError):
        SolverParams(w_demand=-1)
