"""Ground truth for small instances and the construction-only baseline."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass

from .engine import RunReport, make_report
from .instance import PERIODS, Instance
from .reconstruction import RuleParams, reconstruct
from .roster import DEFAULT_W_DEMAND, Schedule, penalty_cost

DEFAULT_CAP = 10**7


class SearchSpaceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    optimal_cost: int
    assignment: tuple[int, ...]
    explored: int
    leaves_evaluated: int
    shortfall_total: int

    @property
    def feasible(self) -> bool:
        return self.shortfall_total == 0


def exhaustive_solve(instance: Instance, w_demand: int = DEFAULT_W_DEMAND, cap: int = DEFAULT_CAP) -> OracleResult:
    """Exact minimum penalty over the full cross product of feasible sets.

    Depth-first in nurse order, patterns ascending, so the first optimum found
    is the lexicographically smallest.  Subtrees are cut when an admissible
    bound (preference so far + cheapest remaining preferences + shortfall that
    the remaining nurses cannot possibly close) cannot beat the incumbent.
    ``explored`` counts every complete assignment, visited or cut.
    """
    size = instance.search_space_size()
    if size > cap:
        raise SearchSpaceTooLarge(f"search space {size} exceeds cap {cap}")

    n, g = instance.n, instance.grades
    demand = [list(row) for row in instance.demand]
    options = []
    for nurse in instance.nurses:
        opts = []
        for j in nurse.feasible_patterns:
            mask = instance.patterns[j].mask
            opts.append((j, nurse.preference_cost[j], [k for k in range(PERIODS) if mask[k]]))
        options.append(opts)
    levels = [list(range(nurse.grade - 1, g)) for nurse in instance.nurses]

    # cheapest completion and maximum extra cover available from nurses d..n-1
    min_rest = [0] * (n + 1)
    reach = [[[0] * g for _ in range(PERIODS)] for _ in range(n + 1)]
    subtree = [1] * (n + 1)
    for d in range(n - 1, -1, -1):
        min_rest[d] = min_rest[d + 1] + min(c for _, c, _ in options[d])
        subtree[d] = subtree[d + 1] * len(options[d])
        worked = set()
        for _, _, periods in options[d]:
            worked.update(periods)
        for k in range(PERIODS):
            for s in range(g):
                reach[d][k][s] = reach[d + 1][k][s] + (1 if k in worked and s in levels[d] else 0)

    cover = [[0] * g for _ in range(PERIODS)]
    choice = [0] * n
    best = {"cost": None, "assignment": None, "short": 0}
    counters = {"explored": 0, "leaves": 0}

    def shortfall_bound(d: int) -> int:
        total = 0
        extra = reach[d]
        for k in range(PERIODS):
            req, row, add = demand[k], cover[k], extra[k]
            for s in range(g):
                gap = req[s] - row[s] - add[s]
                if gap > 0:
                    total += gap
        return total

    def search(d: int, pref: int) -> None:
        incumbent = best["cost"]
        if incumbent is not None and d < n:
            if pref + min_rest[d] + w_demand * shortfall_bound(d) >= incumbent:
                counters["explored"] += subtree[d]
                return
        if d == n:
            counters["explored"] += 1
            counters["leaves"] += 1
            short = shortfall_bound(n)
            cost = pref + w_demand * short
            if incumbent is None or cost < incumbent:
                best["cost"], best["assignment"], best["short"] = cost, tuple(choice), short
            return
        lv = levels[d]
        for j, c, periods in options[d]:
            for k in periods:
                row = cover[k]
                for s in lv:
                    row[s] += 1
            choice[d] = j
            search(d + 1, pref + c)
            for k in periods:
                row = cover[k]
                for s in lv:
                    row[s] -= 1

    search(0, 0)
    return OracleResult(best["cost"], best["assignment"], counters["explored"], counters["leaves"], best["short"])


def greedy_construct(
    instance: Instance,
    rule_params: RuleParams | None = None,
    rng: random.Random | int = 0,
    w_demand: int = DEFAULT_W_DEMAND,
) -> RunReport:
    """Construction-only baseline: a single reconstruction from the empty schedule."""
    start = time.perf_counter()
    seed = rng if isinstance(rng, int) else -1
    if isinstance(rng, int):
        rng = random.Random(rng)
    schedule = reconstruct(Schedule(instance), rule_params or RuleParams(), rng)
    return make_report(schedule.as_tuple(), penalty_cost(schedule, w_demand), 1, seed, None, time.perf_counter() - start)
