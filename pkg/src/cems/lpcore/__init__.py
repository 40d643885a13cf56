"""Self-contained sparse LP (revised simplex) and binary MILP (branch-and-bound) solver."""

from .branch_bound import solve_milp
from .lpfile import dumps, loads, read_lp, write_lp
from .problem import (EQ, GE, INFEASIBLE, LE, OPTIMAL, UNBOUNDED, Constraint,
                      FeasTolerances, LinearProgram, MilpProblem, Solution)
from .simplex import PreparedLP, WarmStart, solve_lp, solve_prepared

__all__ = [
    "EQ", "GE", "LE", "INFEASIBLE", "OPTIMAL", "UNBOUNDED",
    "Constraint", "FeasTolerances", "LinearProgram", "MilpProblem", "Solution",
    "PreparedLP", "WarmStart", "solve_lp", "solve_prepared", "solve_milp",
    "dumps", "loads", "read_lp", "write_lp",
]
