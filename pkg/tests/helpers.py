"""Shared test oracles, independent of the solver's own bookkeeping."""

import random

from chap.instance import PERIODS

ACCEPTANCE_RESULTS: list[tuple[str, bool | None, str]] = []


def record(criterion: str, passed: bool | None, detail: str = "") -> None:
    """``passed=None`` marks a criterion that was skipped."""
    ACCEPTANCE_RESULTS.append((criterion, passed, detail))


def brute_cover(instance, assignment):
    """Independent recount: nurse by nurse, cell by cell."""
    g = instance.grades
    cover = [[0] * g for _ in range(PERIODS)]
    for i, j in enumerate(assignment):
        if j is None:
            continue
        pattern = instance.patterns[j].to_string()
        for k, ch in enumerate(pattern):
            if ch == "1":
                for s in range(1, g + 1):
                    if instance.nurses[i].grade <= s:
                        cover[k][s - 1] += 1
    return cover


def brute_penalty(instance, assignment, w_demand=200):
    cover = brute_cover(instance, assignment)
    pref = sum(instance.nurses[i].preference_cost[j] for i, j in enumerate(assignment) if j is not None)
    short = sum(max(instance.demand[k][s] - cover[k][s], 0) for k in range(PERIODS) for s in range(instance.grades))
    return pref + w_demand * short, pref, short


def random_complete(instance, rng):
    return [rng.choice(n.feasible_patterns) for n in instance.nurses]


def days(*idx):
    return "".join("1" if k in idx else "0" for k in range(PERIODS))
