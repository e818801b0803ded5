"""Component elimination: fitness-thresholded (step I) and uniform random (step II)."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .roster import Schedule


@dataclass(frozen=True)
class PerturbationParams:
    r_m: float = 0.05

    def __post_init__(self):
        if not 0.0 <= self.r_m <= 1.0:
            raise ValueError(f"r_m must be in [0, 1], got {self.r_m}")


def perturbation_one(
    schedule: Schedule,
    fitness: Sequence[float],
    rng: random.Random,
    threshold: float | None = None,
) -> list[int]:
    """Unassign every nurse whose fitness is at or below one shared uniform threshold.

    Exactly one draw from ``rng`` is consumed unless ``threshold`` is forced.
    Returns the eliminated nurse ids in ascending order.
    """
    r_s = rng.random() if threshold is None else threshold
    out = []
    for i, f in enumerate(fitness):
        if f <= r_s and schedule.assignment[i] is not None:
            schedule.unassign(i)
            out.append(i)
    return out


def perturbation_two(schedule: Schedule, params: PerturbationParams, rng: random.Random) -> list[int]:
    """One draw per still-assigned nurse (ascending); eliminate when the draw is below ``r_m``."""
    r_m = params.r_m
    out = []
    assignment = schedule.assignment
    for i in range(len(assignment)):
        if assignment[i] is not None and rng.random() < r_m:
            schedule.unassign(i)
            out.append(i)
    return out
