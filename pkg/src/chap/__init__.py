"""Weekly nurse rostering by repeated elimination and greedy repair of per-nurse assignments."""

from .engine import BatchReport, RunReport, SolverParams, chap_batch, chap_solve, initial_solution
from .evaluation import ComponentFitness, FitnessWeights, coverage_contribution, evaluate_all
from .instance import (
    Instance,
    InstanceError,
    InstanceParseError,
    InstanceValidationError,
    NurseProfile,
    ShiftPattern,
    dumps_instance,
    generate_instance,
    generate_with_witness,
    load_instance,
    make_instance,
    read_instance,
    save_instance,
    validate,
    write_instance,
)
from .oracle import OracleResult, exhaustive_solve, greedy_construct
from .perturbation import PerturbationParams, perturbation_one, perturbation_two
from .reconstruction import RuleParams, combined_score, cover_score, reconstruct
from .roster import CENSORED_COST, CostBreakdown, CoverageLedger, Schedule, penalty_cost, shortfall

__all__ = [
    "BatchReport",
    "CENSORED_COST",
    "ComponentFitness",
    "CostBreakdown",
    "CoverageLedger",
    "FitnessWeights",
    "Instance",
    "InstanceError",
    "InstanceParseError",
    "InstanceValidationError",
    "NurseProfile",
    "OracleResult",
    "PerturbationParams",
    "RuleParams",
    "RunReport",
    "Schedule",
    "ShiftPattern",
    "SolverParams",
    "chap_batch",
    "chap_solve",
    "combined_score",
    "cover_score",
    "coverage_contribution",
    "dumps_instance",
    "evaluate_all",
    "exhaustive_solve",
    "generate_instance",
    "generate_with_witness",
    "greedy_construct",
    "initial_solution",
    "load_instance",
    "make_instance",
    "penalty_cost",
    "perturbation_one",
    "perturbation_two",
    "read_instance",
    "reconstruct",
    "save_instance",
    "shortfall",
    "validate",
    "write_instance",
]
