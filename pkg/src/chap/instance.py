"""Weekly rostering instances: data model, validation, canonical file format, generator.

Periods are indexed 0..13 (days Mon-Sun, then nights Mon-Sun).  Grade bands are
1-based with band 1 the most senior.  Demand rows are indexed by period and by
0-based grade *level*; ``demand[k][s]`` is the number of nurses of band ``s + 1``
or better required on period ``k`` (demand is cumulative across levels).
"""

from __future__ import annotations

import io
import json
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import IO, Any, Iterable, Sequence

import numpy as np

PERIODS = 14
MAX_COST = 100
_TOP_LEVEL_FIELDS = ("grades", "patterns", "nurses", "demand")
_NURSE_FIELDS = ("grade", "feasible")
_OPTION_FIELDS = ("pattern", "cost")


class InstanceError(ValueError):
    """Base class for instance load/generation failures."""


class InstanceParseError(InstanceError):
    pass


class InstanceValidationError(InstanceError):
    def __init__(self, violations: Sequence["Violation"]):
        self.violations = list(violations)
        lines = "\n".join(f"  {v}" for v in self.violations)
        super().__init__(f"{len(self.violations)} validation error(s):\n{lines}")


@dataclass(frozen=True)
class Violation:
    kind: str
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: {self.message} [{self.kind}]"


@dataclass(frozen=True)
class ShiftPattern:
    id: int
    mask: tuple[bool, ...]

    @classmethod
    def from_string(cls, pattern_id: int, text: str) -> "ShiftPattern":
        return cls(pattern_id, tuple(ch == "1" for ch in text))

    @cached_property
    def bits(self) -> int:
        """Mask as an integer with bit ``k`` set iff period ``k`` is worked."""
        return sum(1 << k for k, worked in enumerate(self.mask) if worked)

    @cached_property
    def periods(self) -> tuple[int, ...]:
        return tuple(k for k, worked in enumerate(self.mask) if worked)

    def to_string(self) -> str:
        return "".join("1" if worked else "0" for worked in self.mask)


@dataclass(frozen=True)
class NurseProfile:
    id: int
    grade: int
    feasible_patterns: tuple[int, ...]
    preference_cost: dict[int, int] = field(hash=False)

    def cost(self, pattern_id: int) -> int:
        return self.preference_cost[pattern_id]

    def qualifies(self, level: int) -> bool:
        """True iff this nurse counts towards demand at 0-based level ``level``."""
        return self.grade - 1 <= level


@dataclass(frozen=True)
class NurseTables:
    """Per-nurse lookup tables used on the solver's hot paths."""

    patterns: tuple[int, ...]
    costs: tuple[int, ...]
    bits: tuple[int, ...]
    periods: tuple[tuple[int, ...], ...]
    masks: np.ndarray  # (len(patterns), 14) float64
    desirability: np.ndarray  # 100 - cost, float64
    position: dict[int, int]
    first_level: int


@dataclass(frozen=True)
class Instance:
    """Immutable rostering instance; derived lookup tables are built lazily."""

    grades: int
    patterns: tuple[ShiftPattern, ...]
    nurses: tuple[NurseProfile, ...]
    demand: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.nurses)

    @property
    def m(self) -> int:
        return len(self.patterns)

    def qualifies(self, nurse: int, level: int) -> bool:
        return self.nurses[nurse].qualifies(level)

    @cached_property
    def tables(self) -> tuple[NurseTables, ...]:
        out = []
        for nurse in self.nurses:
            ids = nurse.feasible_patterns
            masks = np.array([self.patterns[j].mask for j in ids], dtype=np.float64).reshape(len(ids), PERIODS)
            costs = tuple(nurse.preference_cost[j] for j in ids)
            out.append(
                NurseTables(
                    patterns=ids,
                    costs=costs,
                    bits=tuple(self.patterns[j].bits for j in ids),
                    periods=tuple(self.patterns[j].periods for j in ids),
                    masks=masks,
                    desirability=MAX_COST - np.asarray(costs, dtype=np.float64),
                    position={j: pos for pos, j in enumerate(ids)},
                    first_level=nurse.grade - 1,
                )
            )
        return tuple(out)

    @cached_property
    def total_demand(self) -> int:
        return sum(sum(row) for row in self.demand)

    def search_space_size(self) -> int:
        size = 1
        for nurse in self.nurses:
            size *= len(nurse.feasible_patterns)
        return size


def make_instance(
    grades: int,
    patterns: Iterable[str | Sequence[bool]],
    nurses: Iterable[tuple[int, dict[int, int]]],
    demand: Iterable[Sequence[int]],
) -> Instance:
    """Convenience constructor: nurses are ``(grade, {pattern_id: cost})`` pairs."""
    pats = []
    for j, p in enumerate(patterns):
        if isinstance(p, str):
            pats.append(ShiftPattern.from_string(j, p))
        else:
            pats.append(ShiftPattern(j, tuple(bool(x) for x in p)))
    profiles = []
    for i, (grade, costs) in enumerate(nurses):
        ordered = dict(sorted(costs.items()))
        profiles.append(NurseProfile(i, grade, tuple(ordered), ordered))
    return Instance(grades, tuple(pats), tuple(profiles), tuple(tuple(row) for row in demand))


# -- validation ---------------------------------------------------------------


def validate(instance: Instance) -> list[Violation]:
    """Return every invariant violation found in ``instance`` (empty when valid)."""
    out: list[Violation] = []
    g = instance.grades
    if not isinstance(g, int) or g < 1:
        out.append(Violation("grades", "grades", f"must be an integer >= 1, got {g!r}"))
        g = 0

    for j, pat in enumerate(instance.patterns):
        loc = f"patterns[{j}]"
        if pat.id != j:
            out.append(Violation("pattern-id", loc, f"id {pat.id} does not match position {j}"))
        if len(pat.mask) != PERIODS:
            out.append(Violation("mask-length", loc, f"mask has {len(pat.mask)} elements, expected {PERIODS}"))
        elif not any(pat.mask):
            out.append(Violation("mask-empty", loc, "pattern works no period"))

    m = len(instance.patterns)
    for i, nurse in enumerate(instance.nurses):
        loc = f"nurses[{i}]"
        if nurse.id != i:
            out.append(Violation("nurse-id", loc, f"id {nurse.id} does not match position {i}"))
        if not isinstance(nurse.grade, int) or not 1 <= nurse.grade <= max(g, 1):
            out.append(Violation("nurse-grade", loc, f"grade {nurse.grade!r} outside [1, {g}]"))
        feas = nurse.feasible_patterns
        if not feas:
            out.append(Violation("feasible-empty", loc, "no feasible patterns"))
        if len(set(feas)) != len(feas):
            out.append(Violation("feasible-duplicate", loc, "duplicate pattern ids"))
        if list(feas) != sorted(feas):
            out.append(Violation("feasible-order", loc, "feasible pattern ids must be ascending"))
        for j in feas:
            if not isinstance(j, int) or not 0 <= j < m:
                out.append(Violation("feasible-range", loc, f"pattern id {j!r} outside [0, {m})"))
        if set(nurse.preference_cost) != set(feas):
            out.append(Violation("cost-keys", loc, "preference costs must be defined for exactly the feasible patterns"))
        for j, c in nurse.preference_cost.items():
            if not isinstance(c, int) or isinstance(c, bool) or not 0 <= c <= MAX_COST:
                out.append(Violation("cost-range", f"{loc}.pattern[{j}]", f"cost {c!r} outside [0, {MAX_COST}]"))

    if len(instance.demand) != PERIODS:
        out.append(Violation("demand-shape", "demand", f"{len(instance.demand)} rows, expected {PERIODS}"))
    for k, row in enumerate(instance.demand):
        loc = f"demand[{k}]"
        if len(row) != g:
            out.append(Violation("demand-shape", loc, f"{len(row)} columns, expected {g}"))
            continue
        if any(not isinstance(r, int) or isinstance(r, bool) or r < 0 for r in row):
            out.append(Violation("demand-value", loc, "entries must be nonnegative integers"))
            continue
        for s in range(1, g):
            if row[s] < row[s - 1]:
                out.append(
                    Violation(
                        "demand-cumulative",
                        loc,
                        f"level {s + 1} demand {row[s]} below level {s} demand {row[s - 1]}",
                    )
                )
                break
    return out


# -- canonical file format ----------------------------------------------------


def _require(doc: dict, key: str, where: str) -> Any:
    if key not in doc:
        raise InstanceParseError(f"{where}: missing field {key!r}")
    return doc[key]


def _reject_unknown(doc: dict, allowed: Sequence[str], where: str) -> None:
    extra = sorted(set(doc) - set(allowed))
    if extra:
        raise InstanceParseError(f"{where}: unknown field(s) {', '.join(map(repr, extra))}")


def _as_int(value: Any, where: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise InstanceParseError(f"{where}: expected integer, got {value!r}")
    return value


def instance_from_dict(doc: Any) -> Instance:
    if not isinstance(doc, dict):
        raise InstanceParseError("document: expected a JSON object")
    _reject_unknown(doc, _TOP_LEVEL_FIELDS, "document")
    for key in _TOP_LEVEL_FIELDS:
        _require(doc, key, "document")

    grades = _as_int(doc["grades"], "grades")

    raw_patterns = doc["patterns"]
    if not isinstance(raw_patterns, list):
        raise InstanceParseError("patterns: expected a list of strings")
    patterns = []
    for j, text in enumerate(raw_patterns):
        if not isinstance(text, str) or set(text) - {"0", "1"}:
            raise InstanceParseError(f"patterns[{j}]: expected a string of '0'/'1', got {text!r}")
        patterns.append(ShiftPattern.from_string(j, text))

    raw_nurses = doc["nurses"]
    if not isinstance(raw_nurses, list):
        raise InstanceParseError("nurses: expected a list")
    nurses = []
    for i, raw in enumerate(raw_nurses):
        where = f"nurses[{i}]"
        if not isinstance(raw, dict):
            raise InstanceParseError(f"{where}: expected an object")
        _reject_unknown(raw, _NURSE_FIELDS, where)
        grade = _as_int(_require(raw, "grade", where), f"{where}.grade")
        options = _require(raw, "feasible", where)
        if not isinstance(options, list):
            raise InstanceParseError(f"{where}.feasible: expected a list")
        ids: list[int] = []
        costs: dict[int, int] = {}
        for o, opt in enumerate(options):
            owhere = f"{where}.feasible[{o}]"
            if not isinstance(opt, dict):
                raise InstanceParseError(f"{owhere}: expected an object")
            _reject_unknown(opt, _OPTION_FIELDS, owhere)
            j = _as_int(_require(opt, "pattern", owhere), f"{owhere}.pattern")
            c = _as_int(_require(opt, "cost", owhere), f"{owhere}.cost")
            ids.append(j)
            costs[j] = c
        nurses.append(NurseProfile(i, grade, tuple(ids), costs))

    raw_demand = doc["demand"]
    if not isinstance(raw_demand, list) or not all(isinstance(r, list) for r in raw_demand):
        raise InstanceParseError("demand: expected a list of integer rows")
    demand = tuple(
        tuple(_as_int(v, f"demand[{k}][{s}]") for s, v in enumerate(row)) for k, row in enumerate(raw_demand)
    )
    return Instance(grades, tuple(patterns), tuple(nurses), demand)


def instance_to_dict(instance: Instance) -> dict:
    return {
        "grades": instance.grades,
        "patterns": [p.to_string() for p in instance.patterns],
        "nurses": [
            {
                "grade": nurse.grade,
                "feasible": [{"pattern": j, "cost": nurse.preference_cost[j]} for j in nurse.feasible_patterns],
            }
            for nurse in instance.nurses
        ],
        "demand": [list(row) for row in instance.demand],
    }


def load_instance(source: IO[bytes] | IO[str] | bytes | str) -> Instance:
    """Parse and validate a canonical instance document."""
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise InstanceParseError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    instance = instance_from_dict(doc)
    problems = validate(instance)
    if problems:
        raise InstanceValidationError(problems)
    return instance


def read_instance(path) -> Instance:
    with open(path, "rb") as fh:
        return load_instance(fh)


def dumps_instance(instance: Instance) -> str:
    """Canonical text: one pattern / nurse / demand row per line."""
    doc = instance_to_dict(instance)

    def block(items: list) -> str:
        if not items:
            return "[]"
        inner = ",\n".join("    " + json.dumps(it, separators=(", ", ": ")) for it in items)
        return "[\n" + inner + "\n  ]"

    return (
        "{\n"
        f'  "grades": {doc["grades"]},\n'
        f'  "patterns": {block(doc["patterns"])},\n'
        f'  "nurses": {block(doc["nurses"])},\n'
        f'  "demand": {block(doc["demand"])}\n'
        "}\n"
    )


def save_instance(instance: Instance, sink: IO[str] | None = None) -> str:
    text = dumps_instance(instance)
    if sink is not None:
        sink.write(text)
    return text


def write_instance(instance: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        save_instance(instance, fh)


def canonicalize(text: str | bytes) -> str:
    """Re-serialize a document without validating it (whitespace-insensitive form)."""
    return dumps_instance(instance_from_dict(json.load(io.StringIO(text if isinstance(text, str) else text.decode()))))


# -- synthetic instances ------------------------------------------------------


def _random_pattern(rng: random.Random) -> int:
    u = rng.random()
    if u < 0.45:
        days = rng.sample(range(7), rng.randint(1, 6))
        return sum(1 << d for d in days)
    if u < 0.8:
        nights = rng.sample(range(7), rng.randint(1, 5))
        return sum(1 << (7 + d) for d in nights)
    periods = rng.sample(range(PERIODS), rng.randint(2, 7))
    return sum(1 << k for k in periods)


def _biased_cost(rng: random.Random) -> int:
    # cubing a uniform skews costs towards 0
    return min(MAX_COST, int((MAX_COST + 1) * rng.random() ** 3))


def generate_instance(
    n: int,
    pattern_count: int,
    grades: int,
    tightness: float,
    seed: int,
    *,
    feasible_range: tuple[int, int] | None = None,
) -> Instance:
    """Random instance guaranteed to admit a shortfall-free assignment."""
    return generate_with_witness(n, pattern_count, grades, tightness, seed, feasible_range=feasible_range)[0]


def generate_with_witness(
    n: int,
    pattern_count: int,
    grades: int,
    tightness: float,
    seed: int,
    *,
    feasible_range: tuple[int, int] | None = None,
) -> tuple[Instance, tuple[int, ...]]:
    """Like :func:`generate_instance` but also return the hidden assignment.

    A hidden assignment (one random feasible pattern per nurse) is drawn and the
    demand is set to ``floor(tightness * cover)`` of that assignment, so the
    hidden assignment itself always meets demand.  ``feasible_range`` bounds the
    size of each nurse's feasible set (default ``m/8 .. m/4``).
    """
    if n < 0:
        raise InstanceError(f"n must be >= 0, got {n}")
    if pattern_count < 1 or pattern_count >= 1 << PERIODS:
        raise InstanceError(f"pattern_count must be in [1, {(1 << PERIODS) - 1}], got {pattern_count}")
    if grades < 1:
        raise InstanceError(f"grades must be >= 1, got {grades}")
    if not 0.0 <= tightness <= 1.0:
        raise InstanceError(f"tightness must be in [0, 1], got {tightness}")
    if feasible_range is None:
        feasible_range = (max(1, pattern_count // 8), max(1, pattern_count // 4))
    lo, hi = feasible_range
    if not 1 <= lo <= hi:
        raise InstanceError(f"invalid feasible_range {feasible_range}")
    lo, hi = min(lo, pattern_count), min(hi, pattern_count)

    rng = random.Random(seed)
    seen: set[int] = set()
    masks: list[int] = []
    attempts = 0
    while len(masks) < pattern_count:
        attempts += 1
        bits = _random_pattern(rng) if attempts < 50 * pattern_count else rng.randrange(1, 1 << PERIODS)
        if bits not in seen:
            seen.add(bits)
            masks.append(bits)
    patterns = tuple(ShiftPattern(j, tuple(bool(b >> k & 1) for k in range(PERIODS))) for j, b in enumerate(masks))

    nurses = []
    witness = []
    cover = [[0] * grades for _ in range(PERIODS)]
    for i in range(n):
        grade = rng.randint(1, grades)
        ids = sorted(rng.sample(range(pattern_count), rng.randint(lo, hi)))
        costs = {j: _biased_cost(rng) for j in ids}
        nurses.append(NurseProfile(i, grade, tuple(ids), costs))
        hidden = rng.choice(ids)
        witness.append(hidden)
        for k in patterns[hidden].periods:
            for s in range(grade - 1, grades):
                cover[k][s] += 1

    demand = tuple(tuple(int(tightness * c) for c in row) for row in cover)
    return Instance(grades, patterns, tuple(nurses), demand), tuple(witness)
