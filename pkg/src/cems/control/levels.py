"""Level 1 (day-ahead commitment) and Level 2 (hourly SMPC) drivers."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from ..domain import CommunityConfig
from ..errors import InfeasibleError, InputError
from ..lpcore import INFEASIBLE, OPTIMAL, FeasTolerances, solve_milp
from ..model.comfort import DEFAULT_CUTS
from ..model.formulation import (BuiltModel, build_level1, build_level2,
                                 resolve_mode)
from ..model.schedule import FfrCommitment, Schedule, extract_schedule
from ..scenario import ScenarioSet, most_probable
from .plant import DeviceControls, PlantState

SLACK_WARN = 1e-6


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances and limits handed to every MILP solve of a run."""

    tol: FeasTolerances = field(default_factory=FeasTolerances)
    gap: float = 1e-6
    node_limit: int = 100_000

    @classmethod
    def from_overrides(cls, overrides: dict | None) -> "SolverOptions":
        """Build from a flat mapping such as ``{"feasibility": 1e-8, "gap": 1e-7}``."""
        ov = dict(overrides or {})
        tol_keys = {"feasibility", "optimality", "pivot", "integrality"}
        unknown = sorted(set(ov) - tol_keys - {"gap", "node_limit"})
        if unknown:
            raise InputError(f"unknown tolerance overrides {unknown}")
        for key, v in ov.items():
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
                raise InputError(f"tolerance {key} must be a positive number")
        tol = FeasTolerances(**{k: float(v) for k, v in ov.items() if k in tol_keys})
        return cls(tol, float(ov.get("gap", 1e-6)), int(ov.get("node_limit", 100_000)))


def attribute_infeasibility(model: BuiltModel, sol) -> dict[str, float]:
    """Phase-1 violation summed per constraint family (and per bounded role)."""
    lp = model.lp
    x = sol.primal
    out: dict[str, float] = defaultdict(float)
    if x is None or not np.all(np.isfinite(x)):
        return {"integrality": float("nan")}
    viol = lp.row_violations(x)
    rows = sol.infeasible_rows or tuple(np.flatnonzero(viol > 1e-7))
    for r in rows:
        out[lp.constraints[r].group] += float(viol[r])
    bviol = lp.bound_violations(x)
    cols = sol.infeasible_vars or tuple(np.flatnonzero(bviol > 1e-7))
    for j in cols:
        out["bounds:" + model.vmap.key(j).role] += float(bviol[j])
    if not out:
        out["integrality"] = 0.0
    return dict(sorted(out.items(), key=lambda kv: -kv[1]))


def _solve(model: BuiltModel, what: str, solver: SolverOptions | None = None) -> Schedule:
    opt = solver or SolverOptions()
    sol = solve_milp(model.milp, opt.tol, gap=opt.gap, node_limit=opt.node_limit)
    if sol.status == INFEASIBLE:
        attr = attribute_infeasibility(model, sol)
        top = ", ".join(f"{k}={v:.4g}" for k, v in list(attr.items())[:5])
        raise InfeasibleError(f"{what} is infeasible; violated families: {top}", attr)
    if sol.status != OPTIMAL:
        raise InfeasibleError(f"{what} ended with status {sol.status}", {})
    return extract_schedule(sol, model)


def _merge(parts: list[Schedule]) -> Schedule:
    """Overlay per-building schedules into one full-community view."""
    series: dict[str, np.ndarray] = {}
    for sch in parts:
        for role, arr in sch.series.items():
            cur = series.get(role)
            if cur is None:
                series[role] = arr.copy()
            else:
                fill = np.isnan(cur) & ~np.isnan(arr)
                cur[fill] = arr[fill]
    pv = parts[0].pv_kw.copy()
    for sch in parts[1:]:
        fill = np.isnan(pv) & ~np.isnan(sch.pv_kw)
        pv[fill] = sch.pv_kw[fill]
    return Schedule(series=series, window=parts[0].window,
                    buildings=tuple(sorted(b for s in parts for b in s.buildings)),
                    pooled=False, weights=parts[0].weights,
                    objective=float(sum(s.objective for s in parts)), pv_kw=pv,
                    fixed_reserves=parts[0].fixed_reserves)


@dataclass(frozen=True)
class DayAheadPlan:
    schedule: Schedule
    commitment: FfrCommitment
    objective_value: float
    mode: str
    pv_scenario: np.ndarray
    per_building_objective: dict[int, float] = field(default_factory=dict)


def run_level1(cfg: CommunityConfig, scenario_set: ScenarioSet, mode: str = "cems",
               num_cuts: int = DEFAULT_CUTS,
               solver: SolverOptions | None = None) -> DayAheadPlan:
    """Solve the day-ahead commitment on the most probable PV scenario.

    In ``bems`` mode each building is solved on its own and the commitments
    are merged.
    """
    irr = most_probable(scenario_set)
    if mode == "cems":
        model = build_level1(cfg, irr, "cems", num_cuts=num_cuts)
        sched = _solve(model, "level-1 model", solver)
        return DayAheadPlan(sched, FfrCommitment.from_schedule(sched), sched.objective,
                            mode, irr)
    parts, objs = [], {}
    for b in range(len(cfg.buildings)):
        resolve_mode(cfg, mode, b)
        model = build_level1(cfg, irr, mode, building=b, num_cuts=num_cuts)
        sched = _solve(model, f"level-1 model for building {cfg.buildings[b].id}", solver)
        parts.append(sched)
        objs[b] = sched.objective
    merged = _merge(parts)
    commitment = FfrCommitment.merge([FfrCommitment.from_schedule(s) for s in parts])
    return DayAheadPlan(merged, commitment, merged.objective, mode, irr, objs)


@dataclass(frozen=True)
class Level2Result:
    step: int
    controls: DeviceControls
    schedule: Schedule
    objective: float
    slack: np.ndarray                  # (B, S) |slack| at step k
    slack_window: float                # total |slack| over the window, all scenarios
    scenario_costs: np.ndarray         # (S,) grid cost over the window per scenario
    elastic: dict[str, float] = field(default_factory=dict)   # reserve-row slack at step k
    elastic_window: float = 0.0

    @property
    def slack_warning(self) -> bool:
        return self.slack_window > SLACK_WARN or self.elastic_window > SLACK_WARN


def _grid_cost_by_scenario(cfg: CommunityConfig, sched: Schedule, k: int, kend: int):
    lam_im = cfg.prices.lambda_import[k:kend, None]
    lam_ex = cfg.prices.lambda_export[k:kend, None]
    dt = cfg.time.step_hours
    if sched.pooled:
        g_im, g_ex = sched["g_im"][k:kend], sched["g_ex"][k:kend]
    else:
        g_im = np.nansum(sched["p_im"][k:kend], axis=1)
        g_ex = np.nansum(sched["p_ex"][k:kend], axis=1)
    return dt * np.sum(lam_im * g_im - lam_ex * g_ex, axis=0)


def run_level2_step(cfg: CommunityConfig, k: int, plan: DayAheadPlan, scenarios: ScenarioSet,
                    plant: PlantState, N: int | None = None,
                    num_cuts: int = DEFAULT_CUTS,
                    solver: SolverOptions | None = None) -> Level2Result:
    """Re-plan the window starting at ``k`` from the measured plant state.

    Only the ``t = k`` slice is meant for execution.
    """
    N = cfg.time.smpc_horizon_N if N is None else N
    T = cfg.time.horizon_steps
    if plan.mode == "cems":
        models = [build_level2(cfg, scenarios, k, N, plan.commitment, plant.soc, plant.t_in,
                               "cems", num_cuts=num_cuts)]
    else:
        models = [build_level2(cfg, scenarios, k, N, plan.commitment, plant.soc, plant.t_in,
                               plan.mode, building=b, num_cuts=num_cuts)
                  for b in range(len(cfg.buildings))]
    parts = [_solve(m, f"level-2 model at step {k}", solver) for m in models]
    sched = parts[0] if len(parts) == 1 else _merge(parts)
    kend = min(k + N, T)
    B = len(cfg.buildings)
    controls = DeviceControls(sched["p_ch"][k], sched["p_dis"][k], sched["p_h"][k])
    slack = np.zeros((B, scenarios.count))
    slack_window = 0.0
    if "slack_pos" in sched:
        mag = (np.maximum(np.nan_to_num(sched["slack_pos"]), 0.0)
               + np.maximum(np.nan_to_num(sched["slack_neg"]), 0.0))
        slack = mag[k]
        slack_window = float(mag[k:kend].sum())
    elastic, elastic_window = {}, 0.0
    for role in ("slack_th_up", "slack_th_dn", "slack_soc_lo", "slack_soc_hi"):
        if role in sched:
            arr = np.maximum(np.nan_to_num(sched[role]), 0.0)
            elastic[role] = float(arr[k].sum())
            elastic_window += float(arr[k:kend].sum())
    return Level2Result(step=k, controls=controls, schedule=sched,
                        objective=float(sum(p.objective for p in parts)), slack=slack,
                        slack_window=slack_window, elastic=elastic,
                        elastic_window=elastic_window,
                        scenario_costs=_grid_cost_by_scenario(cfg, sched, k, kend))
