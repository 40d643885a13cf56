"""Output files: plan, commitment, closed-loop trace, summary and figure tables.

Every CSV writer formats floats with ``repr`` so that reading a file back
reproduces the written values exactly, and rows are emitted in a fixed order
so identical inputs give identical bytes.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..domain import CommunityConfig
from ..errors import InputError
from ..model.schedule import FfrCommitment, Schedule
from ..model.varmap import RESERVE_ROLES_TB, RESERVE_ROLES_TBI, ROLE_DIMS

NONE = -1   # placeholder index for dimensions a record does not have

COMMITMENT_HEADER = ("t", "b", "zone", "r_up", "r_dn", "r_e_up", "r_e_dn", "r_h_up",
                     "r_h_dn", "r_ch_up", "r_ch_dn", "r_dis_up", "r_dis_dn")
TRACE_HEADER = ("step", "substep", "building", "zone", "field", "value")


def _f(v) -> str:
    return repr(float(v))


def _write_rows(path: Path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    return path


def _read_rows(path: Path, header):
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror or exc})") from exc
    with fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None or tuple(first) != tuple(header):
            raise InputError(f"{path}:1: expected header {','.join(header)}")
        for lineno, rec in enumerate(reader, 2):
            if len(rec) != len(header):
                raise InputError(f"{path}:{lineno}: expected {len(header)} fields")
            yield lineno, rec


def _num(path, lineno, text, kind=float):
    try:
        return kind(text)
    except ValueError:
        raise InputError(f"{path}:{lineno}: bad value {text!r}") from None


# -- plan -------------------------------------------------------------------

def write_plan(path, sched: Schedule) -> Path:
    """Long-format schedule ``role,t,b,zone,s,value``; entries outside the model are skipped."""
    def rows():
        for role in sorted(sched.series):
            arr = sched[role]
            dims = ROLE_DIMS[role]
            for idx in np.ndindex(arr.shape):
                v = arr[idx]
                if not np.isfinite(v):
                    continue
                pos = dict(zip(dims, idx))
                t = pos.get("t", pos.get("t1"))
                yield (role, str(t), str(pos.get("b", NONE)), str(pos.get("i", NONE)),
                       str(pos.get("s", NONE)), _f(v))
    return _write_rows(path, ("role", "t", "b", "zone", "s", "value"), rows())


# -- commitment ---------------------------------------------------------------

def write_commitment(path, cfg: CommunityConfig, com: FfrCommitment) -> Path:
    """One row per (t, b, zone); ESS parts repeat on every zone row of a building."""
    T = cfg.time.horizon_steps

    def rows():
        for t in range(T):
            for b, bc in enumerate(cfg.buildings):
                for i in range(len(bc.zones)):
                    vals = [com.r_up[t, b, i], com.r_dn[t, b, i], com.r_e_up[t, b],
                            com.r_e_dn[t, b], com.r_h_up[t, b, i], com.r_h_dn[t, b, i],
                            com.r_ch_up[t, b], com.r_ch_dn[t, b], com.r_dis_up[t, b],
                            com.r_dis_dn[t, b]]
                    yield (str(t), bc.id, str(i), *map(_f, vals))
    return _write_rows(path, COMMITMENT_HEADER, rows())


def read_commitment(path, cfg: CommunityConfig) -> FfrCommitment:
    path = Path(path)
    T, B = cfg.time.horizon_steps, len(cfg.buildings)
    I = max(len(bc.zones) for bc in cfg.buildings)
    ids = {bc.id: b for b, bc in enumerate(cfg.buildings)}
    arrs = {r: np.full((T, B), np.nan) for r in RESERVE_ROLES_TB}
    arrs.update({r: np.full((T, B, I), np.nan) for r in RESERVE_ROLES_TBI})
    seen = set()
    for lineno, rec in _read_rows(path, COMMITMENT_HEADER):
        t = _num(path, lineno, rec[0], int)
        if rec[1] not in ids:
            raise InputError(f"{path}:{lineno}: unknown building {rec[1]!r}")
        b = ids[rec[1]]
        i = _num(path, lineno, rec[2], int)
        if not (0 <= t < T and 0 <= i < len(cfg.buildings[b].zones)):
            raise InputError(f"{path}:{lineno}: index out of range")
        if (t, b, i) in seen:
            raise InputError(f"{path}:{lineno}: duplicate row")
        seen.add((t, b, i))
        v = dict(zip(COMMITMENT_HEADER[3:], (_num(path, lineno, x) for x in rec[3:])))
        for r in RESERVE_ROLES_TBI:
            arrs[r][t, b, i] = v[r]
        for r in RESERVE_ROLES_TB:
            if np.isnan(arrs[r][t, b]):
                arrs[r][t, b] = v[r]
            elif arrs[r][t, b] != v[r]:
                raise InputError(f"{path}:{lineno}: {r} differs between zones of {rec[1]}")
    expected = T * sum(len(bc.zones) for bc in cfg.buildings)
    if len(seen) != expected:
        raise InputError(f"{path}: {len(seen)} rows, expected {expected}")
    return FfrCommitment(**arrs, buildings=tuple(range(B)))


# -- trace ------------------------------------------------------------------

@dataclass(frozen=True)
class TraceTable:
    """Parsed ``trace.csv``: parallel columns in file order."""

    step: np.ndarray
    substep: np.ndarray
    building: np.ndarray
    zone: np.ndarray
    field: np.ndarray
    value: np.ndarray

    def __len__(self) -> int:
        return len(self.value)

    def rows(self):
        return list(zip(self.step.tolist(), self.substep.tolist(), self.building.tolist(),
                        self.zone.tolist(), self.field.tolist(), self.value.tolist()))

    def select(self, field: str, step=None, substep=None, building=None, zone=None):
        m = self.field == field
        for col, want in ((self.step, step), (self.substep, substep),
                          (self.building, building), (self.zone, zone)):
            if want is not None:
                m &= col == want
        return self.value[m]


def trace_rows(trace):
    """Yield ``(step, substep, building, zone, field, value)`` for a trace.

    ``-1`` in the substep, building or zone column marks step-level,
    community-level or building-level records.
    """
    cfg = trace.cfg
    zones = [len(bc.zones) for bc in cfg.buildings]
    for rec in trace.records:
        k = rec.step
        for name, v in (("grid_import_kw", rec.grid_import), ("grid_export_kw", rec.grid_export),
                        ("energy_cost", rec.energy_cost), ("comfort_cost", rec.comfort_cost),
                        ("ffr_revenue", rec.ffr_revenue),
                        ("level2_slack", rec.level2.slack_window),
                        ("level2_elastic", rec.level2.elastic_window),
                        ("saturation_events", rec.level3.saturated),
                        ("honor_violations", rec.level3.honor_violations)):
            yield k, NONE, NONE, NONE, name, float(v)
        c = rec.level2.controls
        for b, n in enumerate(zones):
            for name, v in (("pv_kw", rec.pv_kw[b]), ("net_kw", rec.net_kw[b]),
                            ("p_ch_plan", c.p_ch[b]), ("p_dis_plan", c.p_dis[b]),
                            ("r_e_up", rec.reserves.r_e_up[b]),
                            ("r_e_dn", rec.reserves.r_e_dn[b]),
                            ("soc_kwh", rec.state_after.soc[b]),
                            ("soc_clipped", rec.plant.soc_clipped[b])):
                yield k, NONE, b, NONE, name, float(v)
            for i in range(n):
                for name, v in (("p_h_plan", c.p_h[b, i]), ("r_up", rec.reserves.r_up[b, i]),
                                ("r_dn", rec.reserves.r_dn[b, i]),
                                ("r_h_up", rec.reserves.r_h_up[b, i]),
                                ("r_h_dn", rec.reserves.r_h_dn[b, i]),
                                ("t_in_c", rec.state_after.t_in[b, i]),
                                ("sigma_true", rec.plant.sigma_true[b, i])):
                    yield k, NONE, b, i, name, float(v)
        l3 = rec.level3
        for j in range(l3.substeps):
            yield k, j, NONE, NONE, "reg", float(l3.reg[j])
            for b, n in enumerate(zones):
                yield k, j, b, NONE, "p_ch", float(l3.p_ch[j, b])
                yield k, j, b, NONE, "p_dis", float(l3.p_dis[j, b])
                for i in range(n):
                    yield k, j, b, i, "p_h", float(l3.p_h[j, b, i])


def write_trace(path, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(",".join(TRACE_HEADER) + "\n")
        fh.writelines(f"{s},{j},{b},{i},{name},{v!r}\n" for s, j, b, i, name, v in rows)
    return path


def read_trace(path) -> TraceTable:
    path = Path(path)
    cols: list[list] = [[] for _ in TRACE_HEADER]
    for lineno, rec in _read_rows(path, TRACE_HEADER):
        for c, conv in zip(range(4), (int, int, int, int)):
            cols[c].append(_num(path, lineno, rec[c], conv))
        cols[4].append(rec[4])
        cols[5].append(_num(path, lineno, rec[5]))
    return TraceTable(*(np.array(c, dtype=int) for c in cols[:4]),
                      np.array(cols[4], dtype=str), np.array(cols[5], dtype=float))


# -- summary ----------------------------------------------------------------

def write_json(path, data: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return path


def read_summary(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror or exc})") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from exc
    if not isinstance(data, dict):
        raise InputError(f"{path}: summary must be a JSON object")
    return data


# -- figure tables ----------------------------------------------------------

def figure_tables(trace) -> dict[str, tuple[tuple[str, ...], list[tuple]]]:
    """Plot-ready tables keyed by file name; values are ``(header, rows)``."""
    cfg = trace.cfg
    dt = cfg.time.step_hours
    recs = trace.records
    com = trace.plan.commitment
    plan = trace.plan.schedule
    zones = [len(bc.zones) for bc in cfg.buildings]

    net = [float(r.net_kw.sum()) for r in recs]
    cum = np.cumsum(net) * dt
    fig3a = [(k, net[k], float(cum[k])) for k in range(len(recs))]

    fig3b = []
    for k in range(len(recs)):
        ess = float(np.nansum(com.r_e_up[k]) + np.nansum(com.r_e_dn[k]))
        hvac = float(np.nansum(com.r_h_up[k]) + np.nansum(com.r_h_dn[k]))
        up, dn = float(np.nansum(com.r_up[k])), float(np.nansum(com.r_dn[k]))
        fig3b.append((k, up, dn, ess, hvac, up + dn))

    fig4 = []
    for r in recs:
        c = r.level3.mean_controls()
        for b in range(len(cfg.buildings)):
            fig4.append((r.step, b, float(r.state_before.soc[b]), float(r.state_after.soc[b]),
                         float(c.p_ch[b]), float(c.p_dis[b]),
                         float(r.reserves.r_e_up[b]), float(r.reserves.r_e_dn[b])))

    fig5 = []
    for r in recs:
        c = r.level3.mean_controls()
        for b, n in enumerate(zones):
            for i in range(n):
                fig5.append((r.step, b, i, float(cfg.exogenous.t_out[r.step]),
                             float(r.state_after.t_in[b, i]), float(c.p_h[b, i]),
                             float(r.reserves.r_h_up[b, i]), float(r.reserves.r_h_dn[b, i])))

    fig6 = []
    sub_s = cfg.time.rt_step_seconds
    for r in recs:
        k = r.step
        l1 = float(np.nansum(plan["p_ch"][k]) - np.nansum(plan["p_dis"][k])
                   + np.nansum(plan["p_h"][k]))
        l2 = float(np.sum(r.level2.controls.net_load()))
        l3 = r.level3
        u3 = l3.p_ch.sum(axis=1) - l3.p_dis.sum(axis=1) + np.nansum(l3.p_h, axis=(1, 2))
        for j in range(l3.substeps):
            fig6.append((k, j, (k * l3.substeps + j) * sub_s, l1, l2, float(u3[j]),
                         float(l3.reg[j])))

    return {
        "fig3a_net_demand.csv": (("t", "net_demand_kw", "cumulative_kwh"), fig3a),
        "fig3b_ffr_capacity.csv": (("t", "r_up_kw", "r_dn_kw", "ess_kw", "hvac_kw",
                                    "total_kw"), fig3b),
        "fig4_ess.csv": (("t", "b", "soc_start_kwh", "soc_end_kwh", "p_ch_kw", "p_dis_kw",
                          "r_e_up_kw", "r_e_dn_kw"), fig4),
        "fig5_hvac.csv": (("t", "b", "zone", "t_out_c", "t_in_c", "p_h_kw", "r_h_up_kw",
                           "r_h_dn_kw"), fig5),
        "fig6_smpc_levels.csv": (("t", "substep", "time_s", "level1_kw", "level2_kw",
                                  "level3_kw", "reg"), fig6),
    }


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return _f(v)
    return str(v)


def write_table(path, header, rows) -> Path:
    return _write_rows(path, header, ((_cell(v) for v in row) for row in rows))


def read_table(path) -> tuple[list[str], np.ndarray]:
    """Numeric CSV (e.g. a figure table) as header plus float matrix; text cells raise."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[_num(path, n, c) for c in rec] for n, rec in enumerate(reader, 2)]
    return header, np.array(data, dtype=float).reshape(-1, len(header))
