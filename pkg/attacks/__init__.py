"""Атаки уклонения, отравления и кривые оценки защищенности"""

from attacks.evasion import AttackResult, build_constraint, evasion_problem, run_evasion
from attacks.poisoning import PoisoningResult, poison_gradient, run_poisoning
from attacks.seceval import CSV_HEADER, SecurityEvalCurve, check_eps_grid, security_evaluation
from attacks.specs import EvasionSpec, PoisoningSpec

__all__ = [
    "EvasionSpec", "PoisoningSpec", "AttackResult", "PoisoningResult", "SecurityEvalCurve",
    "build_constraint", "evasion_problem", "run_evasion",
    "poison_gradient", "run_poisoning",
    "security_evaluation", "check_eps_grid", "CSV_HEADER",
]
