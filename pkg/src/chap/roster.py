"""Partial/complete schedules with an incrementally maintained coverage ledger."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import IO, Sequence

from .instance import PERIODS, Instance

CENSORED_COST = 255
DEFAULT_W_DEMAND = 200


class InfeasiblePatternError(ValueError):
    pass


class NotAssignedError(ValueError):
    pass


class CoverageLedger:
    """Qualified cover counts per (period, level) plus derived shortfall state.

    ``cover[k][s]`` counts assigned nurses of band ``s + 1`` or better working
    period ``k``.  ``uncovered[s]`` is a 14-bit set of periods where level ``s``
    is below demand and ``shortfall_total`` is the summed clamped shortfall.
    """

    __slots__ = ("demand", "grades", "cover", "uncovered", "shortfall_total")

    def __init__(self, demand: Sequence[Sequence[int]], grades: int):
        self.demand = demand
        self.grades = grades
        self.cover = [[0] * grades for _ in range(PERIODS)]
        self.uncovered = [sum(1 << k for k in range(PERIODS) if demand[k][s] > 0) for s in range(grades)]
        self.shortfall_total = sum(sum(row) for row in demand)

    def add(self, periods: Sequence[int], first_level: int) -> None:
        g = self.grades
        for k in periods:
            row = self.cover[k]
            req = self.demand[k]
            for s in range(first_level, g):
                c = row[s]
                if c < req[s]:
                    self.shortfall_total -= 1
                    if c + 1 == req[s]:
                        self.uncovered[s] &= ~(1 << k)
                row[s] = c + 1

    def remove(self, periods: Sequence[int], first_level: int) -> None:
        g = self.grades
        for k in periods:
            row = self.cover[k]
            req = self.demand[k]
            for s in range(first_level, g):
                c = row[s] - 1
                if c < 0:
                    raise ValueError(f"cover underflow at period {k}, level {s}")
                if c < req[s]:
                    self.shortfall_total += 1
                    self.uncovered[s] |= 1 << k
                row[s] = c

    def shortfall(self, k: int, s: int) -> int:
        return max(self.demand[k][s] - self.cover[k][s], 0)

    def snapshot(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(row) for row in self.cover)

    def copy(self) -> "CoverageLedger":
        other = CoverageLedger.__new__(CoverageLedger)
        other.demand = self.demand
        other.grades = self.grades
        other.cover = [row[:] for row in self.cover]
        other.uncovered = self.uncovered[:]
        other.shortfall_total = self.shortfall_total
        return other


def shortfall(ledger: CoverageLedger, demand: Sequence[Sequence[int]], k: int, s: int) -> int:
    """Clamped shortfall ``max(R[k][s] - cover[k][s], 0)`` (0-based ``k`` and level ``s``)."""
    return max(demand[k][s] - ledger.cover[k][s], 0)


def recount_cover(instance: Instance, assignment: Sequence[int | None]) -> list[list[int]]:
    """From-scratch cover matrix for ``assignment`` (reference for the ledger)."""
    g = instance.grades
    cover = [[0] * g for _ in range(PERIODS)]
    for i, j in enumerate(assignment):
        if j is None:
            continue
        band = instance.nurses[i].grade
        mask = instance.patterns[j].mask
        for k in range(PERIODS):
            if mask[k]:
                for s in range(g):
                    if band <= s + 1:
                        cover[k][s] += 1
    return cover


@dataclass(frozen=True)
class CostBreakdown:
    preference_total: int
    shortfall_total: int
    penalty: int
    complete: bool = True

    @property
    def feasible(self) -> bool:
        return self.shortfall_total == 0


class Schedule:
    """One owner, mutable.  ``assignment[i]`` is a global pattern id or None."""

    __slots__ = ("instance", "assignment", "ledger", "preference_total", "unassigned")

    def __init__(self, instance: Instance, assignment: Sequence[int | None] | None = None):
        self.instance = instance
        self.assignment: list[int | None] = [None] * instance.n
        self.ledger = CoverageLedger(instance.demand, instance.grades)
        self.preference_total = 0
        self.unassigned = instance.n
        if assignment is not None:
            if len(assignment) != instance.n:
                raise ValueError(f"assignment has {len(assignment)} entries for {instance.n} nurses")
            for i, j in enumerate(assignment):
                if j is not None:
                    self.assign(i, j)

    @property
    def complete(self) -> bool:
        return self.unassigned == 0

    def is_assigned(self, nurse: int) -> bool:
        return self.assignment[nurse] is not None

    def assign(self, nurse: int, pattern: int) -> None:
        """Give ``nurse`` the global pattern id ``pattern`` (replacing any current one)."""
        tab = self.instance.tables[nurse]
        pos = tab.position.get(pattern)
        if pos is None:
            raise InfeasiblePatternError(f"pattern {pattern} is not feasible for nurse {nurse}")
        if self.assignment[nurse] is not None:
            self.unassign(nurse)
        self.assign_position(nurse, pos)

    def assign_position(self, nurse: int, pos: int) -> None:
        """Hot-path assign by index into the nurse's feasible list; nurse must be unassigned."""
        tab = self.instance.tables[nurse]
        self.assignment[nurse] = tab.patterns[pos]
        self.ledger.add(tab.periods[pos], tab.first_level)
        self.preference_total += tab.costs[pos]
        self.unassigned -= 1

    def unassign(self, nurse: int) -> None:
        j = self.assignment[nurse]
        if j is None:
            raise NotAssignedError(f"nurse {nurse} is not assigned")
        tab = self.instance.tables[nurse]
        pos = tab.position[j]
        self.ledger.remove(tab.periods[pos], tab.first_level)
        self.preference_total -= tab.costs[pos]
        self.assignment[nurse] = None
        self.unassigned += 1

    def position(self, nurse: int) -> int:
        return self.instance.tables[nurse].position[self.assignment[nurse]]

    def penalty(self, w_demand: int = DEFAULT_W_DEMAND) -> int:
        return self.preference_total + w_demand * self.ledger.shortfall_total

    def copy(self) -> "Schedule":
        other = Schedule.__new__(Schedule)
        other.instance = self.instance
        other.assignment = self.assignment[:]
        other.ledger = self.ledger.copy()
        other.preference_total = self.preference_total
        other.unassigned = self.unassigned
        return other

    def as_tuple(self) -> tuple[int | None, ...]:
        return tuple(self.assignment)


def penalty_cost(schedule: Schedule, w_demand: int = DEFAULT_W_DEMAND) -> CostBreakdown:
    """Preference total plus ``w_demand`` times total shortfall.

    For a partial schedule only assigned nurses contribute to the preference
    term and the result is flagged ``complete=False``.
    """
    short = schedule.ledger.shortfall_total
    return CostBreakdown(
        preference_total=schedule.preference_total,
        shortfall_total=short,
        penalty=schedule.preference_total + w_demand * short,
        complete=schedule.complete,
    )


def evaluate_assignment(instance: Instance, assignment: Sequence[int], w_demand: int = DEFAULT_W_DEMAND) -> CostBreakdown:
    """Penalty of a complete assignment computed from scratch (no ledger)."""
    pref = 0
    for i, j in enumerate(assignment):
        if j not in instance.nurses[i].preference_cost:
            raise InfeasiblePatternError(f"pattern {j} is not feasible for nurse {i}")
        pref += instance.nurses[i].preference_cost[j]
    cover = recount_cover(instance, assignment)
    short = sum(
        max(instance.demand[k][s] - cover[k][s], 0) for k in range(PERIODS) for s in range(instance.grades)
    )
    return CostBreakdown(pref, short, pref + w_demand * short)


# -- solution files -----------------------------------------------------------


def solution_to_dict(assignment: Sequence[int], cost: CostBreakdown, w_demand: int) -> dict:
    return {
        "assignment": {str(i): j for i, j in enumerate(assignment)},
        "cost": {
            "preference_total": cost.preference_total,
            "shortfall_total": cost.shortfall_total,
            "penalty": cost.penalty,
            "w_demand": w_demand,
        },
    }


def save_solution(assignment: Sequence[int], cost: CostBreakdown, w_demand: int, sink: IO[str]) -> None:
    json.dump(solution_to_dict(assignment, cost, w_demand), sink, indent=2)
    sink.write("\n")


def load_solution(source: IO[str]) -> tuple[dict[int, int], dict]:
    """Return ``({nurse: pattern}, claimed_cost_dict)`` from a solution file."""
    doc = json.load(source)
    if not isinstance(doc, dict) or "assignment" not in doc or "cost" not in doc:
        raise ValueError("solution file needs 'assignment' and 'cost' fields")
    try:
        assignment = {int(i): int(j) for i, j in doc["assignment"].items()}
    except (AttributeError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed assignment: {exc}") from exc
    return assignment, dict(doc["cost"])


def breakdown_dict(cost: CostBreakdown) -> dict:
    return asdict(cost)
