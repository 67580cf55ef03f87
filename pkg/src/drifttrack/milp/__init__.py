"""Mixed-integer machinery: model construction, exact solving, LP text interchange."""

from .branch_bound import (
    BnbNode,
    SolveLimits,
    SolveResult,
    SolveStatus,
    branch_and_bound,
)
from .lpformat import LpDocument, LpParseError, export_lp, parse_lp
from .model import (
    DEFAULT_RHO,
    IndexSets,
    LinearConstraint,
    MilpModel,
    SolutionCheck,
    TieBreak,
    Variable,
    build_model,
    check_solution,
    decode_hypothesis,
    make_tiebreak_model,
)
from .simplex import LpResult, LpStatus, SimplexNumericalError, solve_lp

__all__ = [
    "BnbNode",
    "DEFAULT_RHO",
    "IndexSets",
    "LinearConstraint",
    "LpDocument",
    "LpParseError",
    "LpResult",
    "LpStatus",
    "MilpModel",
    "SimplexNumericalError",
    "SolutionCheck",
    "SolveLimits",
    "SolveResult",
    "SolveStatus",
    "TieBreak",
    "Variable",
    "branch_and_bound",
    "build_model",
    "check_solution",
    "decode_hypothesis",
    "export_lp",
    "make_tiebreak_model",
    "parse_lp",
    "solve_lp",
]
