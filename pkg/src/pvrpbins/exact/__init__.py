"""Exact machinery: MILP emission for external solvers and a brute-force oracle."""

from ..errors import ProblemError
from .lp import (Constraint, LpModel, build_milp, emit_milp, expected_constraint_counts,
                 expected_variable_counts, objective_value, parse_lp, read_assignment,
                 schedule_to_assignment, substitute_solution, write_assignment, write_lp)
from .oracle import DEFAULT_MAX_STATES, OracleResult, brute_force, search_size, visit_patterns


def optimality_gap(overall, lower_bound):
    """``|overall - lower_bound| / |overall|`` as a fraction."""
    if overall == 0:
        raise ProblemError("optimality gap undefined for a zero overall cost")
    return abs(overall - lower_bound) / abs(overall)


__all__ = [
    "Constraint", "LpModel", "build_milp", "emit_milp", "expected_constraint_counts",
    "expected_variable_counts", "objective_value", "parse_lp", "read_assignment",
    "schedule_to_assignment", "substitute_solution", "write_assignment", "write_lp",
    "DEFAULT_MAX_STATES", "OracleResult", "brute_force", "search_size", "visit_patterns",
    "optimality_gap",
]
