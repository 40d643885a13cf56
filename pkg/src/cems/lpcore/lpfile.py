"""Plain-text LP dump (CPLEX LP flavour) with exact float round-trip.

Numbers are written with ``repr`` so ``read_lp(write_lp(lp))`` reproduces every
coefficient bit for bit.  Variables are written as ``x<index>``; the original
names follow in a trailing comment block so external tools see legal names.
"""

from __future__ import annotations

import math
from pathlib import Path

from ..errors import InputError
from .problem import EQ, GE, LE, LinearProgram, MilpProblem

_SENSE_OUT = {LE: "<=", GE: ">=", EQ: "="}


def _num(v: float) -> str:
    if v == math.inf:
        return "+inf"
    if v == -math.inf:
        return "-inf"
    return repr(float(v))


def _terms(coeffs: dict[int, float]) -> str:
    if not coeffs:
        return ""
    parts = []
    for j in sorted(coeffs):
        v = coeffs[j]
        sign = "-" if math.copysign(1.0, v) < 0 else "+"
        parts.append(f"{sign} {_num(abs(v))} x{j}")
    return " ".join(parts)


def dumps(problem: LinearProgram | MilpProblem) -> str:
    if isinstance(problem, MilpProblem):
        lp, bins = problem.lp, sorted(problem.binary_vars)
    else:
        lp, bins = problem, []
    out = ["Minimize", f" obj: {_terms(lp.objective)}", "Subject To"]
    for r, con in enumerate(lp.constraints):
        out.append(f" c{r}: {_terms(con.coeffs)} {_SENSE_OUT[con.sense]} {_num(con.rhs)}")
    out.append("Bounds")
    for j, (lo, hi) in enumerate(lp.var_bounds):
        if lo == -math.inf and hi == math.inf:
            out.append(f" x{j} free")
        else:
            out.append(f" {_num(lo)} <= x{j} <= {_num(hi)}")
    if bins:
        out.append("Binaries")
        out.append(" " + " ".join(f"x{j}" for j in bins))
    out.append("End")
    out.append("\\ names")
    out.extend(f"\\ x{j} {name}" for j, name in enumerate(lp.var_names))
    out.extend(f"\\ c{r} {con.name}" for r, con in enumerate(lp.constraints) if con.name)
    return "\n".join(out) + "\n"


def write_lp(problem: LinearProgram | MilpProblem, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(dumps(problem))
    return path


def _parse_float(tok: str) -> float:
    if tok in ("+inf", "inf"):
        return math.inf
    if tok == "-inf":
        return -math.inf
    return float(tok)


def _parse_terms(tokens: list[str]) -> dict[int, float]:
    coeffs: dict[int, float] = {}
    for k in range(0, len(tokens), 3):
        sign, val, var = tokens[k:k + 3]
        v = _parse_float(val)
        coeffs[int(var[1:])] = -v if sign == "-" else v
    return coeffs


def loads(text: str) -> MilpProblem:
    lines = text.splitlines()
    section = None
    objective: dict[int, float] = {}
    rows: list[tuple[dict[int, float], str, float]] = []
    bounds: dict[int, tuple[float, float]] = {}
    bins: list[int] = []
    names: dict[str, str] = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("\\"):
            parts = line[1:].strip().split(" ", 1)
            if len(parts) == 2 and parts[0] != "names":
                names[parts[0]] = parts[1]
            continue
        if line in ("Minimize", "Subject To", "Bounds", "Binaries", "End"):
            section = line
            continue
        try:
            if section == "Minimize":
                objective = _parse_terms(line.split(":", 1)[1].split())
            elif section == "Subject To":
                body = line.split(":", 1)[1].split()
                rows.append((_parse_terms(body[:-2]), body[-2], _parse_float(body[-1])))
            elif section == "Bounds":
                tok = line.split()
                if tok[1] == "free":
                    bounds[int(tok[0][1:])] = (-math.inf, math.inf)
                else:
                    bounds[int(tok[2][1:])] = (_parse_float(tok[0]), _parse_float(tok[4]))
            elif section == "Binaries":
                bins.extend(int(t[1:]) for t in line.split())
            else:
                raise ValueError(f"content outside a section: {line!r}")
        except (ValueError, IndexError) as exc:
            raise InputError(f"LP text line {lineno}: {exc}") from exc
    n = max(bounds, default=-1) + 1
    lp = LinearProgram()
    for j in range(n):
        lo, hi = bounds.get(j, (0.0, math.inf))
        lp.add_var(names.get(f"x{j}", f"x{j}"), lo, hi)
    lp.objective = objective
    sense_in = {"<=": LE, ">=": GE, "=": EQ}
    for r, (coeffs, sense, rhs) in enumerate(rows):
        lp.add_constraint(coeffs, sense_in[sense], rhs, names.get(f"c{r}", ""))
    return MilpProblem(lp, bins)


def read_lp(path: str | Path) -> MilpProblem:
    return loads(Path(path).read_text())
