"""Bounded-variable revised simplex.

Every LP is rewritten as ``A x - s = 0`` with one logical ``s_r`` per row that
carries the row bounds, so the initial all-logical basis is ``-I``.  Phase 1
minimises the sum of bound infeasibilities of the basic variables and hands
over to phase 2 as soon as the basis is feasible (composite simplex).  The
basis inverse is an LU factorisation plus a product-form eta file that is
refactorised every ``REFACTOR_EVERY`` pivots.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ..errors import ResourceLimitError
from .problem import (INFEASIBLE, OPTIMAL, UNBOUNDED, FeasTolerances,
                      LinearProgram, Solution)

log = logging.getLogger(__name__)

BASIC, AT_LOWER, AT_UPPER, FREE_ZERO = 0, 1, 2, 3

REFACTOR_EVERY = 64
DEGENERATE_LIMIT = 40


def _pow2_scale(mx: np.ndarray) -> np.ndarray:
    """Power-of-two factor that brings ``mx`` into (0.5, 1]; 1 for empty entries."""
    out = np.ones_like(mx)
    nz = mx > 0
    out[nz] = np.exp2(-np.ceil(np.log2(mx[nz])))
    return out


@dataclass(frozen=True)
class WarmStart:
    basis: np.ndarray
    status: np.ndarray


class PreparedLP:
    """Equilibrated copy of a :class:`LinearProgram`, reusable across bound changes.

    Columns are scaled first (never up), then rows (never down), both by powers
    of two.  With that ordering every scaled violation bounds the original one.
    """

    def __init__(self, lp: LinearProgram):
        lp.validate()
        self.lp = lp
        self.n = lp.num_vars
        self.m = lp.num_rows
        A = lp.matrix().astype(float)
        absA = abs(A)
        colmax = np.asarray(absA.max(axis=0).todense()).ravel() if self.m else np.zeros(self.n)
        col = np.minimum(_pow2_scale(colmax), 1.0)
        A = A @ sp.diags(col)
        rowmax = np.asarray(abs(A).max(axis=1).todense()).ravel() if self.n else np.zeros(self.m)
        row = np.maximum(_pow2_scale(rowmax), 1.0)
        A = sp.diags(row) @ A
        self.col_scale = col
        self.row_scale = row
        full = sp.hstack([A, -sp.identity(self.m, format="csc")], format="csc")
        full.sort_indices()
        self.full = full
        self.fullT = full.T.tocsr()
        c = lp.cost_vector() * col
        cmax = np.abs(c).max(initial=0.0)
        self.obj_scale = float(_pow2_scale(np.array([cmax]))[0]) if cmax > 0 else 1.0
        self.cost = np.concatenate([c * self.obj_scale, np.zeros(self.m)])
        rlo, rhi = lp.row_bounds()
        self.row_lo = rlo * row
        self.row_hi = rhi * row
        self.var_lo, self.var_hi = lp.bounds_arrays()

    def scaled_bounds(self, lo=None, hi=None):
        lo = self.var_lo if lo is None else lo
        hi = self.var_hi if hi is None else hi
        return (np.concatenate([lo / self.col_scale, self.row_lo]),
                np.concatenate([hi / self.col_scale, self.row_hi]))

    def column(self, j: int) -> np.ndarray:
        v = np.zeros(self.m)
        a, b = self.full.indptr[j], self.full.indptr[j + 1]
        v[self.full.indices[a:b]] = self.full.data[a:b]
        return v


class _Factor:
    """LU of the basis matrix with product-form updates."""

    def __init__(self, full: sp.csc_matrix, basis: np.ndarray):
        B = full[:, basis]
        self.lu = splu(B.tocsc(), permc_spec="COLAMD")
        self.etas: list[tuple[int, np.ndarray]] = []

    def ftran(self, v: np.ndarray) -> np.ndarray:
        v = self.lu.solve(v)
        for r, a in self.etas:
            vr = v[r] / a[r]
            if vr != 0.0:
                v -= vr * a
            v[r] = vr
        return v

    def btran(self, c: np.ndarray) -> np.ndarray:
        w = c.astype(float, copy=True)
        for r, a in reversed(self.etas):
            wr = w[r]
            w[r] = (wr - (w @ a - wr * a[r])) / a[r]
        return self.lu.solve(w, trans="T")


def _initial_status(lo, hi, n_total, m, warm: WarmStart | None):
    status = np.empty(n_total, dtype=np.int8)
    status[:] = AT_LOWER
    status[~np.isfinite(lo)] = AT_UPPER
    status[~np.isfinite(lo) & ~np.isfinite(hi)] = FREE_ZERO
    if warm is not None and len(warm.basis) == m and len(warm.status) == n_total:
        basis = np.asarray(warm.basis, dtype=np.int64).copy()
        ws = warm.status
        keep_upper = (ws == AT_UPPER) & np.isfinite(hi)
        status[keep_upper] = AT_UPPER
        keep_lower = (ws == AT_LOWER) & np.isfinite(lo)
        status[keep_lower] = AT_LOWER
    else:
        basis = np.arange(n_total - m, n_total, dtype=np.int64)
    status[basis] = BASIC
    return basis, status


def _nonbasic_values(lo, hi, status):
    x = np.zeros(len(lo))
    sel = status == AT_LOWER
    x[sel] = lo[sel]
    sel = status == AT_UPPER
    x[sel] = hi[sel]
    return x


def _run(prep: PreparedLP, lo: np.ndarray, hi: np.ndarray, tol: FeasTolerances,
         warm: WarmStart | None, max_iter: int):
    m = prep.m
    n_total = prep.n + m
    full, fullT, cost = prep.full, prep.fullT, prep.cost
    ftol, otol, ptol = tol.feasibility, tol.optimality, tol.pivot
    fixed = lo == hi

    basis, status = _initial_status(lo, hi, n_total, m, warm)
    x = _nonbasic_values(lo, hi, status)

    def refactor():
        nonlocal fac
        try:
            fac = _Factor(full, basis)
        except RuntimeError:
            # numerically singular basis: fall back to the logical basis
            log.debug("singular basis on refactor, resetting to slack basis")
            for j in basis:
                if j < prep.n:
                    status[j] = AT_LOWER if np.isfinite(lo[j]) else (
                        AT_UPPER if np.isfinite(hi[j]) else FREE_ZERO)
            basis[:] = np.arange(prep.n, n_total)
            status[basis] = BASIC
            fac = _Factor(full, basis)
        xn = _nonbasic_values(lo, hi, status)
        xn[basis] = 0.0
        x[:] = xn
        if m:
            x[basis] = fac.ftran(-(full @ xn))

    fac = None
    refactor()
    it = 0
    degenerate = 0
    bland = False
    verified = False
    zero_cost = np.zeros(n_total)

    while True:
        if fac.etas and len(fac.etas) >= REFACTOR_EVERY:
            refactor()
        xB = x[basis]
        loB, hiB = lo[basis], hi[basis]
        below = xB < loB - ftol
        above = xB > hiB + ftol
        phase1 = bool(below.any() or above.any())
        if phase1:
            cB = above.astype(float) - below.astype(float)
            base_cost = zero_cost
        else:
            cB = cost[basis]
            base_cost = cost
        y = fac.btran(cB) if m else np.zeros(0)
        d = base_cost - fullT @ y if m else base_cost.copy()

        elig = np.zeros(n_total, dtype=bool)
        elig |= (status == AT_LOWER) & (d < -otol)
        elig |= (status == AT_UPPER) & (d > otol)
        elig |= (status == FREE_ZERO) & (np.abs(d) > otol)
        elig &= ~fixed

        if not elig.any():
            if fac.etas and not verified:
                verified = True
                refactor()
                continue
            if phase1:
                return INFEASIBLE, x, basis, status, it, (below | above)
            return OPTIMAL, x, basis, status, it, None
        verified = False

        it += 1
        if it > max_iter:
            raise ResourceLimitError(f"simplex iteration limit {max_iter} exceeded")

        if bland:
            q = int(np.flatnonzero(elig)[0])
        else:
            q = int(np.argmax(np.where(elig, np.abs(d), -1.0)))
        direction = 1.0 if d[q] < 0 else -1.0

        alpha = fac.ftran(prep.column(q)) if m else np.zeros(0)
        delta = -direction * alpha

        dec = delta < -ptol
        inc = delta > ptol
        feas = ~(below | above)
        lim = np.full(m, np.inf)
        relax = np.full(m, np.inf)
        to_upper = np.zeros(m, dtype=bool)
        target = np.zeros(m)

        sel = dec & above
        target[sel] = hiB[sel]
        to_upper[sel] = True
        sel2 = dec & feas & np.isfinite(loB)
        target[sel2] = loB[sel2]
        dsel = sel | sel2
        if dsel.any():
            lim[dsel] = (xB[dsel] - target[dsel]) / -delta[dsel]
            relax[dsel] = (xB[dsel] - target[dsel] + ftol) / -delta[dsel]

        sel = inc & below
        target[sel] = loB[sel]
        sel2 = inc & feas & np.isfinite(hiB)
        target[sel2] = hiB[sel2]
        to_upper[sel2] = True
        isel = sel | sel2
        if isel.any():
            lim[isel] = (target[isel] - xB[isel]) / delta[isel]
            relax[isel] = (target[isel] - xB[isel] + ftol) / delta[isel]

        r = -1
        theta = np.inf
        if np.isfinite(relax).any():
            if bland:
                tmin = lim.min()
                cand = np.flatnonzero(lim <= tmin + 1e-12)
                r = int(cand[np.argmin(basis[cand])])
            else:
                tmax = relax.min()
                cand = np.flatnonzero(lim <= tmax)
                r = int(cand[np.argmax(np.abs(delta[cand]))])
            theta = max(lim[r], 0.0)

        span = hi[q] - lo[q]
        flip = np.isfinite(span) and span <= theta
        if r < 0 and not flip:
            if phase1:
                # lost the feasibility direction to round-off; start over
                refactor()
                continue
            if fac.etas and not verified:
                verified = True
                refactor()
                continue
            return UNBOUNDED, x, basis, status, it, None

        if flip:
            theta = span
        if theta <= 1e-12:
            degenerate += 1
            if degenerate > DEGENERATE_LIMIT:
                bland = True
        else:
            degenerate = 0
            bland = False

        if m:
            x[basis] = xB + theta * delta
        if flip:
            status[q] = AT_UPPER if direction > 0 else AT_LOWER
            x[q] = hi[q] if direction > 0 else lo[q]
            continue

        x[q] = x[q] + direction * theta
        leaving = basis[r]
        if to_upper[r] and not fixed[leaving]:
            status[leaving] = AT_UPPER
            x[leaving] = hi[leaving]
        else:
            status[leaving] = AT_LOWER
            x[leaving] = lo[leaving]
        basis[r] = q
        status[q] = BASIC
        fac.etas.append((r, alpha))


def solve_prepared(prep: PreparedLP, tol: FeasTolerances | None = None,
                   lo: np.ndarray | None = None, hi: np.ndarray | None = None,
                   warm: WarmStart | None = None,
                   max_iter: int | None = None) -> Solution:
    tol = tol or FeasTolerances()
    slo, shi = prep.scaled_bounds(lo, hi)
    if np.any(slo > shi):
        return Solution(INFEASIBLE, np.inf, np.full(prep.n, np.nan))
    if max_iter is None:
        max_iter = 50 * (prep.n + prep.m)
    status_s, xs, basis, status, it, infeas = _run(prep, slo, shi, tol, warm, max_iter)
    x = xs[:prep.n] * prep.col_scale
    ws = WarmStart(basis.copy(), status.copy())
    if status_s == OPTIMAL:
        return Solution(OPTIMAL, prep.lp.evaluate(x), x, iterations=it, basis=ws)
    if status_s == UNBOUNDED:
        return Solution(UNBOUNDED, -np.inf, x, iterations=it, basis=ws)
    bad = basis[np.flatnonzero(infeas)]
    rows = tuple(int(j - prep.n) for j in bad if j >= prep.n)
    cols = tuple(int(j) for j in bad if j < prep.n)
    return Solution(INFEASIBLE, np.inf, x, iterations=it, basis=ws,
                    infeasible_rows=rows, infeasible_vars=cols)


def solve_lp(lp: LinearProgram, tol: FeasTolerances | None = None,
             warm: WarmStart | None = None, max_iter: int | None = None) -> Solution:
    """Solve ``lp`` to a basic optimum.

    Raises :class:`~cems.errors.InputError` on structural defects and
    :class:`~cems.errors.ResourceLimitError` when ``max_iter`` (default
    ``50 * (num_vars + num_rows)``) pivots are exceeded.
    """
    return solve_prepared(PreparedLP(lp), tol, warm=warm, max_iter=max_iter)
