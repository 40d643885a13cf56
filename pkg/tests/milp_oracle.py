"""Random bounded MILPs and an independent oracle: enumerate binaries, solve each LP with HiGHS."""

import itertools

import numpy as np
from scipy.optimize import linprog

from cems.lpcore import EQ, GE, LE, LinearProgram, MilpProblem


def random_milp(rng, max_bin=10, max_cont=20, max_rows=12):
    """A bounded MILP that is feasible at a hidden point ``x0``."""
    nb = int(rng.integers(1, max_bin + 1))
    nc = int(rng.integers(1, max_cont + 1))
    n, m = nb + nc, int(rng.integers(2, max_rows + 1))
    lo = np.concatenate([np.zeros(nb), -rng.integers(0, 3, nc).astype(float)])
    hi = np.concatenate([np.ones(nb), lo[nb:] + rng.uniform(1.0, 6.0, nc).round(2)])
    x0 = np.concatenate([rng.integers(0, 2, nb), rng.uniform(lo[nb:], hi[nb:])])
    A = rng.normal(size=(m, n)).round(2)
    A[rng.random((m, n)) < 0.4] = 0.0
    ax = A @ x0
    senses = rng.choice([LE, GE, EQ], size=m, p=[0.6, 0.3, 0.1])
    lp = LinearProgram()
    for j in range(n):
        lp.add_var(f"{'z' if j < nb else 'y'}{j}", lo[j], hi[j], round(float(rng.normal()), 3))
    for i in range(m):
        slack = float(rng.uniform(0.0, 2.0))
        rhs = {LE: ax[i] + slack, GE: ax[i] - slack, EQ: ax[i]}[senses[i]]
        lp.add_constraint({j: A[i, j] for j in range(n)}, senses[i], rhs, f"r[{i}]")
    return MilpProblem(lp, range(nb))


def _split_rows(lp, cols):
    A = lp.matrix().toarray()
    ub, bub, eq, beq = [], [], [], []
    for i, con in enumerate(lp.constraints):
        if con.sense == LE:
            ub.append(i); bub.append(con.rhs)
        elif con.sense == GE:
            ub.append(i); bub.append(-con.rhs)
        else:
            eq.append(i); beq.append(con.rhs)
    sign = np.array([-1.0 if lp.constraints[i].sense == GE else 1.0 for i in ub])
    return A, ub, sign, np.array(bub), eq, np.array(beq)


def enumerate_optimum(p: MilpProblem) -> float:
    """Minimum over every 0/1 assignment of the binaries; ``inf`` if none is feasible."""
    lp = p.lp
    bins = sorted(p.binary_vars)
    cont = [j for j in range(lp.num_vars) if j not in p.binary_vars]
    A, ub, sign, bub, eq, beq = _split_rows(lp, cont)
    c = lp.cost_vector()
    Ab, Ac = A[:, bins], A[:, cont]
    bounds = [lp.var_bounds[j] for j in cont]
    best = np.inf
    for z in itertools.product((0.0, 1.0), repeat=len(bins)):
        z = np.array(z)
        fixed = Ab @ z
        r = linprog(c[cont],
                    A_ub=(sign[:, None] * Ac[ub]) if ub else None,
                    b_ub=(bub - sign * fixed[ub]) if ub else None,
                    A_eq=Ac[eq] if eq else None,
                    b_eq=(beq - fixed[eq]) if eq else None,
                    bounds=bounds, method="highs")
        if r.status == 0:
            best = min(best, r.fun + c[bins] @ z)
    return best


def highs_lp(lp: LinearProgram):
    """(status, objective) of ``lp`` from HiGHS."""
    A, ub, sign, bub, eq, beq = _split_rows(lp, range(lp.num_vars))
    r = linprog(lp.cost_vector(),
                A_ub=(sign[:, None] * A[ub]) if ub else None, b_ub=bub if ub else None,
                A_eq=A[eq] if eq else None, b_eq=beq if eq else None,
                bounds=lp.var_bounds, method="highs")
    status = {0: "optimal", 2: "infeasible", 3: "unbounded"}.get(r.status, str(r.status))
    return status, (r.fun if r.status == 0 else None)
