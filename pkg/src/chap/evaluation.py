"""Per-nurse fitness of the current assignment (preference part + coverage part)."""

from __future__ import annotations

from dataclasses import dataclass

from .instance import PERIODS
from .roster import NotAssignedError, Schedule


@dataclass(frozen=True)
class FitnessWeights:
    w_pref: float = 0.5
    w_cover: float = 0.5

    def __post_init__(self):
        if self.w_pref < 0 or self.w_cover < 0:
            raise ValueError("fitness weights must be nonnegative")
        if abs(self.w_pref + self.w_cover - 1.0) > 1e-9:
            raise ValueError(f"fitness weights must sum to 1, got {self.w_pref} + {self.w_cover}")


@dataclass(frozen=True)
class ComponentFitness:
    f1: float
    f2: float
    F: float
    C: int


def _tight_sets(schedule: Schedule) -> list[int]:
    """Per level, the periods where dropping one qualified nurse leaves cover below demand."""
    ledger = schedule.ledger
    demand = ledger.demand
    cover = ledger.cover
    out = []
    for s in range(ledger.grades):
        bits = 0
        for k in range(PERIODS):
            if cover[k][s] <= demand[k][s]:
                bits |= 1 << k
        out.append(bits)
    return out


def _contribution(bits: int, first_level: int, tight: list[int]) -> int:
    return sum((bits & tight[s]).bit_count() for s in range(first_level, len(tight)))


def coverage_contribution(schedule: Schedule, nurse: int) -> int:
    """Number of covered (period, level) slots that would fall short without this nurse."""
    j = schedule.assignment[nurse]
    if j is None:
        raise NotAssignedError(f"nurse {nurse} is not assigned")
    return _contribution(schedule.instance.patterns[j].bits, schedule.instance.nurses[nurse].grade - 1, _tight_sets(schedule))


def _normalise_low(values: list[int]) -> list[float]:
    hi, lo = max(values), min(values)
    if hi == lo:
        return [1.0] * len(values)
    span = hi - lo
    return [(hi - v) / span for v in values]


def _normalise_high(values: list[int]) -> list[float]:
    hi, lo = max(values), min(values)
    if hi == lo:
        return [1.0] * len(values)
    span = hi - lo
    return [(v - lo) / span for v in values]


def _raw_terms(schedule: Schedule) -> tuple[list[int], list[int]]:
    if schedule.instance.n == 0:
        raise ValueError("cannot evaluate an empty schedule")
    if not schedule.complete:
        raise ValueError("evaluation needs a complete schedule")
    tight = _tight_sets(schedule)
    tables = schedule.instance.tables
    costs = []
    contribs = []
    for i, j in enumerate(schedule.assignment):
        tab = tables[i]
        pos = tab.position[j]
        costs.append(tab.costs[pos])
        contribs.append(_contribution(tab.bits[pos], tab.first_level, tight))
    return costs, contribs


def fitness_scores(schedule: Schedule, weights: FitnessWeights) -> list[float]:
    """Combined fitness ``F`` for every nurse, clipped to [0, 1]."""
    costs, contribs = _raw_terms(schedule)
    wp, wc = weights.w_pref, weights.w_cover
    return [min(1.0, wp * a + wc * b) for a, b in zip(_normalise_low(costs), _normalise_high(contribs))]


def evaluate_all(schedule: Schedule, weights: FitnessWeights) -> list[ComponentFitness]:
    """Score each nurse's assignment on a complete schedule.

    Preference and coverage terms are min-max normalised over the nurses of the
    current schedule; if all nurses share the same value the term is 1.
    """
    costs, contribs = _raw_terms(schedule)
    wp, wc = weights.w_pref, weights.w_cover
    return [
        ComponentFitness(a, b, min(1.0, wp * a + wc * b), c)
        for a, b, c in zip(_normalise_low(costs), _normalise_high(contribs), contribs)
    ]
