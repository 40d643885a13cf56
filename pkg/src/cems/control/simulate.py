"""Closed-loop day: Level 1 once, then hourly Level 2, Level 3 and the plant."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..domain import CommunityConfig, pv_output, require_valid
from ..errors import InputError, StateError
from ..model.comfort import DEFAULT_CUTS, add_comfort_cuts
from ..model.formulation import max_zones
from ..scenario import CovModel, draw_truth, generate_day_ahead, update_hourly
from .level3 import Level3Result, ReserveSlice, run_level3
from .levels import (DayAheadPlan, Level2Result, SolverOptions, run_level1,
                     run_level2_step)
from .plant import BOUND_TOL, PlantLog, PlantState, plant_step


@dataclass(frozen=True)
class StepRecord:
    step: int
    level2: Level2Result
    level3: Level3Result
    reserves: ReserveSlice
    pv_kw: np.ndarray            # (B,) realised PV
    net_kw: np.ndarray           # (B,) realised step-average grid draw
    grid_import: float           # metered import (kW, step average)
    grid_export: float
    energy_cost: float
    comfort_cost: float
    ffr_revenue: float
    state_before: PlantState
    state_after: PlantState
    plant: PlantLog
    sigma_env: np.ndarray        # (B, I) cut-envelope discomfort at the new temperature

    @property
    def cost(self) -> float:
        return self.energy_cost + self.comfort_cost - self.ffr_revenue


@dataclass
class ClosedLoopTrace:
    """Append-only record of a simulated day."""

    cfg: CommunityConfig
    plan: DayAheadPlan
    mode: str
    seed: int
    horizon_N: int
    truth_irr: np.ndarray
    records: list[StepRecord] = field(default_factory=list)

    def append(self, rec: StepRecord) -> None:
        if rec.step != len(self.records):
            raise StateError(f"expected record for step {len(self.records)}, got {rec.step}")
        self.records.append(rec)

    @property
    def complete(self) -> bool:
        return len(self.records) == self.cfg.time.horizon_steps

    def __len__(self) -> int:
        return len(self.records)


def _cov_model(cfg: CommunityConfig, seed: int) -> CovModel:
    sc = cfg.scenarios
    return CovModel(sc.marginal_std, sc.corr_length_hours, seed, cfg.time.step_hours)


def _bill(cfg: CommunityConfig, k: int, net: np.ndarray, pooled: bool):
    dt = cfg.time.step_hours
    lam_im, lam_ex = cfg.prices.lambda_import[k], cfg.prices.lambda_export[k]
    if pooled:
        tot = float(net.sum())
        imp, exp = max(tot, 0.0), max(-tot, 0.0)
    else:
        imp = float(np.maximum(net, 0.0).sum())
        exp = float(np.maximum(-net, 0.0).sum())
    return imp, exp, dt * (lam_im * imp - lam_ex * exp)


def simulate_day(cfg: CommunityConfig, seed: int = 0, mode: str = "cems", *,
                 N: int | None = None, truth_irr=None,
                 num_cuts: int = DEFAULT_CUTS,
                 solver: SolverOptions | None = None) -> ClosedLoopTrace:
    """Run the three-level hierarchy over one day against the plant.

    Realised PV comes from ``truth_irr`` if given, else from
    ``cfg.exogenous.truth_irr``, else from an independent draw of the scenario
    model.  All randomness derives from ``seed``.
    """
    require_valid(cfg)
    tg = cfg.time
    T, n_sub = tg.horizon_steps, tg.substeps
    N = tg.smpc_horizon_N if N is None else N
    cov = _cov_model(cfg, seed)
    day_ahead = generate_day_ahead(cfg.exogenous, cov, cfg.scenarios.count)
    plan = run_level1(cfg, day_ahead, mode, num_cuts=num_cuts, solver=solver)

    if truth_irr is None:
        truth_irr = cfg.exogenous.truth_irr
    if truth_irr is None:
        truth_irr = draw_truth(cfg.exogenous, cov)
    truth = np.asarray(truth_irr, dtype=float)
    if truth.shape != (T,):
        raise InputError(f"truth irradiance must have {T} values")
    reg = np.asarray(cfg.exogenous.reg_signal, dtype=float)
    if len(reg) < T * n_sub:
        raise InputError(f"regulation signal has {len(reg)} values, need {T * n_sub}")

    B, I = len(cfg.buildings), max_zones(cfg)
    cuts = {(b, i): add_comfort_cuts(z, num_cuts)
            for b, bc in enumerate(cfg.buildings) for i, z in enumerate(bc.zones)}
    p_ch_max = np.array([bc.ess.p_ch_max_kw for bc in cfg.buildings])
    p_dis_max = np.array([bc.ess.p_dis_max_kw for bc in cfg.buildings])
    p_h_max = np.full((B, I), np.nan)
    for (b, i), _ in cuts.items():
        p_h_max[b, i] = cfg.buildings[b].zones[i].p_h_max_kw
    demand = np.array([bc.demand_load + bc.demand_ev for bc in cfg.buildings])

    trace = ClosedLoopTrace(cfg, plan, mode, seed, N, truth)
    state = PlantState.initial(cfg)
    pr = cfg.prices
    for k in range(T):
        sset = update_hourly(day_ahead, cov, k, truth)
        l2 = run_level2_step(cfg, k, plan, sset, state, N, num_cuts=num_cuts,
                             solver=solver)
        reserves = ReserveSlice.from_commitment(plan.commitment, k)
        l3 = run_level3(l2.controls, reserves, reg[k * n_sub:(k + 1) * n_sub],
                        p_ch_max=p_ch_max, p_dis_max=p_dis_max, p_h_max=p_h_max)
        executed = l3.mean_controls()
        nxt, log = plant_step(cfg, state, executed)
        pv = np.array([pv_output(bc.pv, truth[k]) for bc in cfg.buildings])
        net = demand[:, k] - pv + executed.net_load()
        imp, exp, energy = _bill(cfg, k, net, mode == "cems")
        env = np.full((B, I), np.nan)
        for (b, i), cc in cuts.items():
            env[b, i] = float(cc.envelope(nxt.t_in[b, i]))
        comfort = pr.lambda_comfort * float(np.nansum(env))
        revenue = pr.lambda_ffr * float(np.sum(reserves.r_up) + np.sum(reserves.r_dn))
        trace.append(StepRecord(k, l2, l3, reserves, pv, net, imp, exp, energy, comfort,
                                revenue, state, nxt, log, env))
        state = nxt
    return trace


def compute_metrics(trace: ClosedLoopTrace) -> dict:
    """Aggregate a complete trace into scalar metrics and per-step series."""
    if not trace.complete:
        raise InputError(f"trace has {len(trace)} of {trace.cfg.time.horizon_steps} steps")
    cfg = trace.cfg
    dt = cfg.time.step_hours
    sub_h = cfg.time.rt_step_seconds / 3600.0
    recs = trace.records
    com = trace.plan.commitment
    net = np.array([r.net_kw.sum() for r in recs])
    dep_up = sum(float(r.level3.deployed_up.sum()) for r in recs) * sub_h
    dep_dn = sum(float(r.level3.deployed_dn.sum()) for r in recs) * sub_h
    sigma_true = np.array([np.nansum(r.plant.sigma_true) for r in recs])
    t_in = np.array([r.state_after.t_in for r in recs])
    soc = np.array([r.state_after.soc for r in recs])
    committed_up = dt * float(np.nansum(com.r_up))
    committed_dn = dt * float(np.nansum(com.r_dn))
    return {
        "mode": trace.mode,
        "seed": trace.seed,
        "horizon_steps": cfg.time.horizon_steps,
        "smpc_horizon": trace.horizon_N,
        "buildings": cfg.building_ids,
        "cost_total": float(sum(r.cost for r in recs)),
        "energy_cost": float(sum(r.energy_cost for r in recs)),
        "comfort_penalty": float(sum(r.comfort_cost for r in recs)),
        "ffr_revenue": float(sum(r.ffr_revenue for r in recs)),
        "level1_objective": float(trace.plan.objective_value),
        "ffr_committed_kwh": committed_up + committed_dn,
        "ffr_committed_up_kwh": committed_up,
        "ffr_committed_dn_kwh": committed_dn,
        "ffr_committed_ess_kwh": dt * float(np.nansum(com.r_e_up) + np.nansum(com.r_e_dn)),
        "ffr_committed_hvac_kwh": dt * float(np.nansum(com.r_h_up) + np.nansum(com.r_h_dn)),
        "ffr_deployed_kwh": dep_up + dep_dn,
        "ffr_deployed_up_kwh": dep_up,
        "ffr_deployed_dn_kwh": dep_dn,
        "comfort_integral": float(sigma_true.sum() * dt),
        "net_demand_kw": net.tolist(),
        "cumulative_net_demand_kwh": float(net.sum() * dt),
        "grid_import_kwh": float(sum(r.grid_import for r in recs) * dt),
        "grid_export_kwh": float(sum(r.grid_export for r in recs) * dt),
        "temp_min_c": float(np.nanmin(t_in)),
        "temp_max_c": float(np.nanmax(t_in)),
        "temp_excursions": int(sum(int((r.plant.temp_violation > BOUND_TOL).sum())
                                   for r in recs)),
        "soc_min_kwh": float(soc.min()),
        "soc_max_kwh": float(soc.max()),
        "soc_violations": int(sum(int((r.plant.soc_violation > BOUND_TOL).sum())
                                  for r in recs)),
        "soc_clip_events": int(sum(int(r.plant.soc_clipped.sum()) for r in recs)),
        "honor_violations": int(sum(r.level3.honor_violations for r in recs)),
        "saturation_events": int(sum(r.level3.saturated for r in recs)),
        "slack_total_kw": float(sum(r.level2.slack_window for r in recs)),
        "slack_executed_kw": float(sum(r.level2.slack.sum() for r in recs)),
        "elastic_total": float(sum(r.level2.elastic_window for r in recs)),
        "elastic_executed": float(sum(sum(r.level2.elastic.values()) for r in recs)),
        "level2_warnings": int(sum(r.level2.slack_warning for r in recs)),
        "substeps": int(sum(r.level3.substeps for r in recs)),
    }
