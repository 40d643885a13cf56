"""Best-first branch-and-bound over binary variables."""

from __future__ import annotations

import heapq
import itertools
import logging

import numpy as np

from ..errors import ResourceLimitError
from .problem import (INFEASIBLE, OPTIMAL, UNBOUNDED, FeasTolerances,
                      MilpProblem, Solution)
from .simplex import PreparedLP, WarmStart, solve_prepared

log = logging.getLogger(__name__)


def _rounding_candidates(x, frac_idx):
    up = x.copy()
    up[frac_idx] = 1.0
    near = x.copy()
    near[frac_idx] = np.round(x[frac_idx])
    down = x.copy()
    down[frac_idx] = 0.0
    return (up, near, down)


def _simple_rounding(prep: PreparedLP, A, row_lo, row_hi, x, bins, tol):
    """Round the binaries of a relaxed point without moving continuous values.

    Returns a feasible integral point or ``None``.
    """
    xb = x[bins]
    snapped = np.where(np.abs(xb - np.round(xb)) <= tol.integrality, np.round(xb), xb)
    frac_idx = bins[np.abs(snapped - np.round(snapped)) > 0]
    base = x.copy()
    base[bins] = snapped
    for cand in _rounding_candidates(base, frac_idx):
        ax = A @ cand
        if np.all(ax >= row_lo - tol.feasibility) and np.all(ax <= row_hi + tol.feasibility):
            if np.all(cand >= prep.var_lo - tol.feasibility) and np.all(cand <= prep.var_hi + tol.feasibility):
                return cand
    return None


def solve_milp(p: MilpProblem, tol: FeasTolerances | None = None, gap: float = 1e-6,
               node_limit: int = 100_000, warm: WarmStart | None = None) -> Solution:
    """Minimise a MILP whose integer variables are all binary.

    Nodes are explored best-bound first (ties broken towards deeper nodes);
    the branching variable is the most fractional binary and children are
    warm-started from the parent's optimal basis.  The returned incumbent is
    within ``gap`` (absolute) of the optimum.
    """
    tol = tol or FeasTolerances()
    p.validate()
    prep = PreparedLP(p.lp)
    bins = np.array(sorted(p.binary_vars), dtype=np.int64)
    A = p.lp.matrix()
    row_lo, row_hi = p.lp.row_bounds()
    lo0, hi0 = prep.var_lo.copy(), prep.var_hi.copy()

    counter = itertools.count()
    # (bound, -depth, seq, fixed_lo, fixed_hi, warm)
    heap = [(-np.inf, 0, next(counter), lo0, hi0, warm)]
    best_x = None
    best_obj = np.inf
    best_basis = None
    root_bound = None
    nodes = 0
    iterations = 0

    lower = np.inf
    while heap:
        bound, negdepth, _, lo, hi, ws = heapq.heappop(heap)
        if bound >= best_obj - gap:
            lower = bound
            heap.clear()
            break
        nodes += 1
        if nodes > node_limit:
            lower = min([bound] + [h[0] for h in heap])
            raise ResourceLimitError(
                f"branch-and-bound node limit {node_limit} exceeded",
                incumbent=best_obj if best_x is not None else None, bound=lower)
        sol = solve_prepared(prep, tol, lo=lo, hi=hi, warm=ws)
        iterations += sol.iterations
        if sol.status == UNBOUNDED:
            return Solution(UNBOUNDED, -np.inf, sol.primal, iterations=iterations, nodes=nodes)
        if sol.status == INFEASIBLE:
            if root_bound is None:
                return Solution(INFEASIBLE, np.inf, sol.primal, iterations=iterations,
                                nodes=nodes, infeasible_rows=sol.infeasible_rows,
                                infeasible_vars=sol.infeasible_vars)
            continue
        if root_bound is None:
            root_bound = sol.objective_value
        obj = sol.objective_value
        if obj >= best_obj - gap:
            continue
        x = sol.primal
        xb = x[bins]
        frac = np.abs(xb - np.round(xb))
        fractional = frac > tol.integrality
        if not fractional.any():
            xi = x.copy()
            xi[bins] = np.round(xb)
            best_x, best_obj = xi, obj
            best_basis = sol.basis
            continue
        cand = _simple_rounding(prep, A, row_lo, row_hi, x, bins, tol)
        if cand is not None:
            cobj = p.lp.evaluate(cand)
            if cobj < best_obj:
                best_x, best_obj = cand, cobj
                best_basis = sol.basis
                if obj >= best_obj - gap:
                    continue
        # most fractional: distance to nearest integer closest to 0.5
        k = int(np.argmax(np.where(fractional, frac, -1.0)))
        j = bins[k]
        depth = -negdepth + 1
        for val in (1.0, 0.0):
            clo, chi = lo.copy(), hi.copy()
            clo[j] = chi[j] = val
            heapq.heappush(heap, (obj, -depth, next(counter), clo, chi, sol.basis))

    if best_x is None:
        return Solution(INFEASIBLE, np.inf, np.full(p.lp.num_vars, np.nan),
                        iterations=iterations, nodes=nodes)
    lower = min(lower, best_obj)
    return Solution(OPTIMAL, best_obj, best_x, mip_gap=max(best_obj - lower, 0.0),
                    iterations=iterations, nodes=nodes, basis=best_basis)
