"""Greedy repair of partial schedules with the Cover, Combined and random rules."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .instance import MAX_COST, PERIODS
from .roster import InfeasiblePatternError, Schedule

DEFAULT_GRADE_WEIGHTS = (8.0, 2.0, 1.0)
CASCADES = ("serviceable", "printed")


def default_grade_weights(grades: int) -> tuple[float, ...]:
    """(8, 2, 1) for three grades; truncated, or padded with 1.0, otherwise."""
    w = DEFAULT_GRADE_WEIGHTS[:grades]
    return w + (1.0,) * (grades - len(w))


@dataclass(frozen=True)
class RuleParams:
    p1: float = 0.80
    p2: float = 0.18
    p3: float = 0.02
    w_p: float = 1.0
    w_grade: tuple[float, ...] | None = None
    cascade: str = "serviceable"

    def __post_init__(self):
        if min(self.p1, self.p2, self.p3) < 0:
            raise ValueError("rule probabilities must be nonnegative")
        if abs(self.p1 + self.p2 + self.p3 - 1.0) > 1e-12:
            raise ValueError(f"p1 + p2 + p3 must be 1, got {self.p1 + self.p2 + self.p3!r}")
        if self.cascade not in CASCADES:
            raise ValueError(f"cascade must be one of {CASCADES}, got {self.cascade!r}")
        if self.w_grade is not None:
            object.__setattr__(self, "w_grade", tuple(float(w) for w in self.w_grade))

    def grade_weights(self, grades: int) -> tuple[float, ...]:
        if self.w_grade is None:
            return default_grade_weights(grades)
        if len(self.w_grade) != grades:
            raise ValueError(f"w_grade has {len(self.w_grade)} entries for {grades} grades")
        return self.w_grade


def _cascade_levels(first_level: int, grades: int, cascade: str) -> range:
    # serviceable: own level, then the broader levels this nurse also counts towards
    if cascade == "serviceable":
        return range(first_level, grades)
    return range(first_level, -1, -1)


def _target_level(schedule: Schedule, first_level: int, cascade: str) -> int | None:
    uncovered = schedule.ledger.uncovered
    for s in _cascade_levels(first_level, schedule.ledger.grades, cascade):
        if uncovered[s]:
            return s
    return None


def _check_feasible(schedule: Schedule, nurse: int, pattern: int) -> int:
    pos = schedule.instance.tables[nurse].position.get(pattern)
    if pos is None:
        raise InfeasiblePatternError(f"pattern {pattern} is not feasible for nurse {nurse}")
    return pos


def cover_score(schedule: Schedule, nurse: int, pattern: int, cascade: str = "serviceable") -> int:
    """Worked periods of ``pattern`` still short at the nurse's target level.

    The target level is the first level in cascade order with any short period;
    the score is 0 when no level in the cascade is short.
    """
    _check_feasible(schedule, nurse, pattern)
    s = _target_level(schedule, schedule.instance.nurses[nurse].grade - 1, cascade)
    if s is None:
        return 0
    return (schedule.instance.patterns[pattern].bits & schedule.ledger.uncovered[s]).bit_count()


def _period_gain(schedule: Schedule, first_level: int, weights: Sequence[float]) -> list[float]:
    ledger = schedule.ledger
    demand, cover, g = ledger.demand, ledger.cover, ledger.grades
    gain = [0.0] * PERIODS
    for k in range(PERIODS):
        req, row = demand[k], cover[k]
        total = 0.0
        for s in range(first_level, g):
            short = req[s] - row[s]
            if short > 0:
                total += weights[s] * short
        gain[k] = total
    return gain


def combined_score(schedule: Schedule, nurse: int, pattern: int, rules: RuleParams) -> float:
    """``w_p * (100 - p) + sum_s w_s * q(nurse, s) * sum_k a(pattern, k) * shortfall(k, s)``."""
    pos = _check_feasible(schedule, nurse, pattern)
    tab = schedule.instance.tables[nurse]
    gain = _period_gain(schedule, tab.first_level, rules.grade_weights(schedule.ledger.grades))
    return rules.w_p * (MAX_COST - tab.costs[pos]) + sum(gain[k] for k in tab.periods[pos])


def best_cover_position(schedule: Schedule, nurse: int, cascade: str) -> int:
    tab = schedule.instance.tables[nurse]
    s = _target_level(schedule, tab.first_level, cascade)
    if s is None:
        return 0
    uncov = schedule.ledger.uncovered[s]
    best, best_pos = -1, 0
    for pos, bits in enumerate(tab.bits):
        score = (bits & uncov).bit_count()
        if score > best:
            best, best_pos = score, pos
    return best_pos


def best_combined_position(schedule: Schedule, nurse: int, rules: RuleParams, weights: Sequence[float]) -> int:
    tab = schedule.instance.tables[nurse]
    gain = _period_gain(schedule, tab.first_level, weights)
    scores = rules.w_p * tab.desirability
    if any(gain):
        scores = scores + tab.masks @ np.asarray(gain)
    return int(np.argmax(scores))


def reconstruct(schedule: Schedule, rules: RuleParams, rng: random.Random) -> Schedule:
    """Assign every unassigned nurse, ascending by index, updating cover as it goes.

    Per nurse one uniform draw picks the rule (Cover below ``p1``, Combined below
    ``p1 + p2``, random otherwise); the random rule takes one further draw.
    Ties go to the first pattern in the nurse's feasible list.
    """
    if schedule.complete:
        return schedule
    weights = rules.grade_weights(schedule.ledger.grades)
    p1 = rules.p1
    p12 = rules.p1 + rules.p2
    tables = schedule.instance.tables
    assignment = schedule.assignment
    for i in range(len(assignment)):
        if assignment[i] is not None:
            continue
        u = rng.random()
        if u < p1:
            pos = best_cover_position(schedule, i, rules.cascade)
        elif u < p12:
            pos = best_combined_position(schedule, i, rules, weights)
        else:
            pos = rng.randrange(len(tables[i].patterns))
        schedule.assign_position(i, pos)
    return schedule
