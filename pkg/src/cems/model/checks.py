"""Independent residual check of an extracted schedule.

The checks are written directly from the physical model (config + schedule)
and never look at the LP rows, so they catch mistakes in the row generator as
well as in the solver.  Each family reports its largest violation; zero means
satisfied.  Thermal reserve rows are checked against the true comfort band,
not the planning margin used by the optimiser.
"""

from __future__ import annotations

import numpy as np

from ..domain import CommunityConfig
from .schedule import Schedule


def _worst(arr) -> float:
    a = np.asarray(arr, dtype=float)
    a = a[np.isfinite(a)]
    return float(max(a.max(initial=0.0), 0.0)) + 0.0


def check_schedule(cfg: CommunityConfig, sched: Schedule,
                   initial_soc=None, include_slack: bool = False) -> dict[str, float]:
    """Largest violation per constraint family over the schedule's window.

    ``include_slack`` credits balance slack when computing the balance
    residual; by default slack counts as a violation.
    """
    k, kend = sched.window
    T, dt = cfg.time.horizon_steps, cfg.time.step_hours
    t_out = cfg.exogenous.t_out
    out: dict[str, list[float]] = {}

    def rec(family, value):
        out.setdefault(family, []).append(_worst(value))

    S = sched.num_scenarios
    for b in sched.buildings:
        bc = cfg.buildings[b]
        ess = bc.ess
        ts = np.arange(k, kend)
        p_ch, p_dis = sched["p_ch"][ts, b], sched["p_dis"][ts, b]
        z_ch, z_dis = sched["z_ch"][ts, b], sched["z_dis"][ts, b]
        e = sched["e"][k:kend + 1, b]
        p_h = sched["p_h"][ts, b, :len(bc.zones)]
        demand = bc.demand_load[ts] + bc.demand_ev[ts]

        pv = sched.pv_kw[ts, b, :]
        for s in range(S):
            resid = (sched["p_im"][ts, b, s] - sched["p_ex"][ts, b, s] + p_dis - p_ch
                     - p_h.sum(axis=1) - demand + pv[:, s])
            if include_slack and "slack_pos" in sched:
                resid = resid + sched["slack_pos"][ts, b, s] - sched["slack_neg"][ts, b, s]
            rec("balance", np.abs(resid))
            rec("grid_nonneg", -sched["p_im"][ts, b, s])
            rec("grid_nonneg", -sched["p_ex"][ts, b, s])

        # ESS dynamics, corridor, boundary, exclusivity
        rec("ess_dyn", np.abs(e[1:] - e[:-1] - dt * ess.eta_ch * p_ch + dt * p_dis / ess.eta_dis))
        rec("soc_corridor", ess.soc_min_kwh - e[1:])
        rec("soc_corridor", e[1:] - ess.soc_max_kwh)
        if k == 0:
            rec("soc_boundary", abs(e[0] - ess.soc_boundary_kwh))
        if initial_soc is not None:
            rec("soc_initial", abs(e[0] - initial_soc[b]))
        if kend == T:
            rec("soc_boundary", abs(e[-1] - ess.soc_boundary_kwh))
        rec("ess_power", -p_ch)
        rec("ess_power", -p_dis)
        rec("ess_excl", z_ch + z_dis - 1.0)
        rec("ess_excl", np.abs(z_ch - np.round(z_ch)))
        rec("ess_excl", np.abs(z_dis - np.round(z_dis)))
        rec("ess_link", p_ch - ess.p_ch_max_kw * z_ch)
        rec("ess_link", p_dis - ess.p_dis_max_kw * z_dis)

        r = {n: sched[n][ts, b] for n in ("r_ch_up", "r_ch_dn", "r_dis_up", "r_dis_dn",
                                           "r_e_up", "r_e_dn")}
        for v in r.values():
            rec("reserve_nonneg", -v)
        rec("ess_reserve_power", p_dis + r["r_dis_up"] - ess.p_dis_max_kw)
        rec("ess_reserve_power", ess.p_dis_min_kw - (p_dis - r["r_dis_dn"]))
        rec("ess_reserve_power", ess.p_ch_min_kw - (p_ch - r["r_ch_up"]))
        rec("ess_reserve_power", p_ch + r["r_ch_dn"] - ess.p_ch_max_kw)
        e_now = e[:-1]
        floor = (e_now + dt * ess.eta_ch * (p_ch - r["r_ch_up"])
                 - dt * (p_dis + r["r_dis_up"]) / ess.eta_dis)
        ceil = (e_now + dt * ess.eta_ch * (p_ch + r["r_ch_dn"])
                - dt * (p_dis - r["r_dis_dn"]) / ess.eta_dis)
        rec("ess_reserve_energy", ess.soc_min_kwh - floor)
        rec("ess_reserve_energy", ceil - ess.soc_max_kwh)
        rec("ess_headroom", ess.e_min_kwh + dt * r["r_e_dn"] - e[1:])
        rec("ess_headroom", e[1:] + dt * r["r_e_up"] - ess.e_max_kwh)
        rec("reserve_composition", np.abs(r["r_e_up"] - r["r_ch_up"] - r["r_dis_up"]))
        rec("reserve_composition", np.abs(r["r_e_dn"] - r["r_ch_dn"] - r["r_dis_dn"]))

        for i, z in enumerate(bc.zones):
            keep, outdoor, hvac = z.etp_coefficients(dt)
            tin = sched["t_in"][k:kend + 1, b, i]
            ph = p_h[:, i]
            free = keep * tin[:-1] + outdoor * t_out[ts]
            rec("etp", np.abs(tin[1:] - (free - hvac * ph)))
            rec("temp_bounds", z.temp_min_c - tin[1:])
            rec("temp_bounds", tin[1:] - z.temp_max_c)
            rhu, rhd = sched["r_h_up"][ts, b, i], sched["r_h_dn"][ts, b, i]
            rec("reserve_nonneg", -rhu)
            rec("reserve_nonneg", -rhd)
            rec("thermal_reserve", free - hvac * (ph - rhu) - z.temp_max_c)
            rec("thermal_reserve", z.temp_min_c - (free - hvac * (ph + rhd)))
            rec("hvac_power", -ph)
            rec("hvac_power", ph - z.p_h_max_kw)
            rec("hvac_reserve_room", rhu - ph)
            rec("hvac_reserve_room", ph + rhd - z.p_h_max_kw)
            rec("ffr_composition",
                np.abs(sched["r_up"][ts, b, i] - r["r_e_up"] - rhu))
            rec("ffr_composition",
                np.abs(sched["r_dn"][ts, b, i] - r["r_e_dn"] - rhd))

    if sched.pooled and "g_im" in sched:
        ts = np.arange(k, kend)
        for s in range(S):
            net = sum(sched["p_im"][ts, b, s] - sched["p_ex"][ts, b, s] for b in sched.buildings)
            rec("community", np.abs(sched["g_im"][ts, s] - sched["g_ex"][ts, s] - net))
            rec("grid_nonneg", -sched["g_im"][ts, s])
            rec("grid_nonneg", -sched["g_ex"][ts, s])
    return {fam: max(v) for fam, v in sorted(out.items())}


def max_residual(report: dict[str, float]) -> float:
    return max(report.values(), default=0.0)
