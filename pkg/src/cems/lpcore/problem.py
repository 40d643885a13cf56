"""Sparse LP/MILP containers consumed by the simplex and branch-and-bound kernels."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..errors import InputError

LE, EQ, GE = "<=", "=", ">="
SENSES = (LE, EQ, GE)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class FeasTolerances:
    feasibility: float = 1e-7
    optimality: float = 1e-7
    pivot: float = 1e-9
    integrality: float = 1e-6


@dataclass
class Constraint:
    coeffs: dict[int, float]
    sense: str
    rhs: float
    name: str = ""

    @property
    def group(self) -> str:
        """Constraint family, i.e. the name up to the first ``[``."""
        return self.name.split("[", 1)[0] if self.name else "<unnamed>"


@dataclass
class LinearProgram:
    """Minimise ``objective @ x`` subject to sparse rows and variable bounds.

    Variables default to ``(0, +inf)`` bounds.  Rows are kept as
    coefficient dictionaries; :meth:`matrix` assembles the CSR form on demand.
    """

    num_vars: int = 0
    objective: dict[int, float] = field(default_factory=dict)
    constraints: list[Constraint] = field(default_factory=list)
    var_bounds: list[tuple[float, float]] = field(default_factory=list)
    var_names: list[str] = field(default_factory=list)

    def add_var(self, name: str = "", lb: float = 0.0, ub: float = math.inf,
                cost: float = 0.0) -> int:
        j = self.num_vars
        self.num_vars += 1
        self.var_bounds.append((float(lb), float(ub)))
        self.var_names.append(name or f"x{j}")
        if cost:
            self.objective[j] = float(cost)
        return j

    def add_constraint(self, coeffs: dict[int, float], sense: str, rhs: float,
                       name: str = "") -> int:
        if sense not in SENSES:
            raise InputError(f"unknown constraint sense {sense!r}")
        row = {int(j): float(v) for j, v in coeffs.items() if v != 0.0}
        self.constraints.append(Constraint(row, sense, float(rhs), name))
        return len(self.constraints) - 1

    @property
    def num_rows(self) -> int:
        return len(self.constraints)

    def validate(self) -> None:
        """Raise :class:`InputError` on any structural violation."""
        if len(self.var_bounds) != self.num_vars:
            raise InputError("var_bounds length differs from num_vars")
        if len(self.var_names) != self.num_vars:
            raise InputError("var_names length differs from num_vars")
        for j, (lo, hi) in enumerate(self.var_bounds):
            if math.isnan(lo) or math.isnan(hi) or lo > hi:
                raise InputError(f"variable {self.var_names[j]}: bounds {lo} > {hi}")
            if lo == math.inf or hi == -math.inf:
                raise InputError(f"variable {self.var_names[j]}: empty bound range")
        for j in self.objective:
            if not 0 <= j < self.num_vars:
                raise InputError(f"objective references column {j} >= num_vars")
        for r, con in enumerate(self.constraints):
            for j in con.coeffs:
                if not 0 <= j < self.num_vars:
                    raise InputError(
                        f"row {r} ({con.name}) references column {j} >= num_vars")
            if con.sense == EQ and not math.isfinite(con.rhs):
                raise InputError(f"equality row {r} ({con.name}) has rhs {con.rhs}")
            if math.isnan(con.rhs):
                raise InputError(f"row {r} ({con.name}) has NaN rhs")

    def matrix(self) -> sp.csr_matrix:
        indptr = [0]
        indices: list[int] = []
        data: list[float] = []
        for con in self.constraints:
            indices.extend(con.coeffs.keys())
            data.extend(con.coeffs.values())
            indptr.append(len(indices))
        return sp.csr_matrix(
            (np.asarray(data, dtype=float), np.asarray(indices, dtype=np.int64),
             np.asarray(indptr, dtype=np.int64)),
            shape=(self.num_rows, self.num_vars))

    def cost_vector(self) -> np.ndarray:
        c = np.zeros(self.num_vars)
        for j, v in self.objective.items():
            c[j] = v
        return c

    def bounds_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.var_bounds:
            return np.zeros(0), np.zeros(0)
        b = np.asarray(self.var_bounds, dtype=float)
        return b[:, 0].copy(), b[:, 1].copy()

    def row_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.full(self.num_rows, -np.inf)
        hi = np.full(self.num_rows, np.inf)
        for r, con in enumerate(self.constraints):
            if con.sense != LE:
                lo[r] = con.rhs
            if con.sense != GE:
                hi[r] = con.rhs
        return lo, hi

    def evaluate(self, x: np.ndarray) -> float:
        return float(sum(v * x[j] for j, v in self.objective.items()))

    def row_violations(self, x: np.ndarray) -> np.ndarray:
        """Per-row violation ``max(lo - a@x, a@x - hi, 0)``."""
        if self.num_rows == 0:
            return np.zeros(0)
        ax = self.matrix() @ np.asarray(x, dtype=float)
        lo, hi = self.row_bounds()
        with np.errstate(invalid="ignore"):
            v = np.maximum(np.maximum(lo - ax, ax - hi), 0.0)
        return np.nan_to_num(v)

    def bound_violations(self, x: np.ndarray) -> np.ndarray:
        lo, hi = self.bounds_arrays()
        return np.maximum(np.maximum(lo - x, x - hi), 0.0)

    def max_violation(self, x: np.ndarray) -> float:
        rv = self.row_violations(x)
        bv = self.bound_violations(x)
        return float(max(rv.max(initial=0.0), bv.max(initial=0.0)))


@dataclass
class MilpProblem:
    lp: LinearProgram
    binary_vars: frozenset[int] = frozenset()

    def __post_init__(self):
        self.binary_vars = frozenset(int(j) for j in self.binary_vars)

    def validate(self) -> None:
        self.lp.validate()
        for j in self.binary_vars:
            if not 0 <= j < self.lp.num_vars:
                raise InputError(f"binary index {j} out of range")
            lo, hi = self.lp.var_bounds[j]
            if lo < 0.0 or hi > 1.0:
                raise InputError(
                    f"binary {self.lp.var_names[j]} has bounds ({lo}, {hi}) outside [0, 1]")


@dataclass
class Solution:
    status: str
    objective_value: float
    primal: np.ndarray
    mip_gap: float = 0.0
    iterations: int = 0
    nodes: int = 0
    basis: object = None
    infeasible_rows: tuple[int, ...] = ()
    infeasible_vars: tuple[int, ...] = ()

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL
