"""Day-ahead (Level 1) and rolling stochastic (Level 2) MILP construction.

Both levels share one row generator.  Level 1 is the single-scenario,
full-day instance with reserve variables; Level 2 is a window ``[k, kend)``
with scenario-indexed grid exchange (recourse), shared device schedules and
reserves fixed to the day-ahead commitment.

Sign convention of the objective: import cost - export revenue
+ comfort penalty - FFR revenue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..domain import CommunityConfig, pv_output, require_valid
from ..errors import InputError
from ..lpcore import EQ, GE, LE, LinearProgram, MilpProblem
from .comfort import DEFAULT_CUTS, ComfortCuts, add_comfort_cuts
from .schedule import FfrCommitment, role_shape
from .varmap import VarKey, VarMap

SLACK_PRICE_FACTOR = 100.0
# Reserve-adjusted thermal and SoC rows plan against bands shrunk by a small
# margin so that the state drift caused by real-time deployment inside one step
# can be absorbed at the next re-plan without breaking the true limits.
THERMAL_MARGIN_C = 0.1
SOC_MARGIN_FRAC = 0.01

# Human-readable meaning of each constraint family, used for infeasibility reports.
FAMILIES = {
    "balance": "building power balance",
    "community": "community grid coupling",
    "etp": "zone thermal dynamics",
    "thermal_up": "thermal bound under up-reserve deployment",
    "thermal_dn": "thermal bound under down-reserve deployment",
    "hvac_up_room": "HVAC power room for up-reserve",
    "hvac_dn_room": "HVAC power room for down-reserve",
    "comfort_cut": "discomfort tangent cut",
    "ess_dyn": "ESS state-of-charge dynamics",
    "ess_link_ch": "charge power vs charge mode",
    "ess_link_dis": "discharge power vs discharge mode",
    "ess_excl": "charge/discharge exclusivity",
    "ess_dis_up": "discharge room for up-reserve",
    "ess_dis_dn": "discharge room for down-reserve",
    "ess_ch_up": "charge room for up-reserve",
    "ess_ch_dn": "charge room for down-reserve",
    "ess_energy_up": "SoC floor under up-reserve deployment",
    "ess_energy_dn": "SoC ceiling under down-reserve deployment",
    "ess_headroom_lo": "SoC reserve headroom (lower)",
    "ess_headroom_hi": "SoC reserve headroom (upper)",
    "r_e_up_sum": "ESS up-reserve composition",
    "r_e_dn_sum": "ESS down-reserve composition",
    "ffr_up": "FFR up composition",
    "ffr_dn": "FFR down composition",
}


@dataclass
class BuiltModel:
    milp: MilpProblem
    vmap: VarMap
    level: int
    window: tuple[int, int]
    buildings: tuple[int, ...]
    pooled: bool
    weights: np.ndarray
    pv_kw: np.ndarray
    T: int
    B: int
    I: int
    S: int
    constants: dict[str, np.ndarray] = field(default_factory=dict)
    objective_offset: float = 0.0
    fixed_reserves: bool = False
    slack_price: float = 0.0
    cuts: dict[tuple[int, int], ComfortCuts] = field(default_factory=dict)

    def __iter__(self):
        # allows ``milp, vmap = build_level1(...)``
        yield self.milp
        yield self.vmap

    @property
    def lp(self) -> LinearProgram:
        return self.milp.lp


class _Row:
    __slots__ = ("coeffs", "const")

    def __init__(self):
        self.coeffs: dict[int, float] = {}
        self.const = 0.0

    def add(self, coef: float, ref) -> "_Row":
        if isinstance(ref, int):
            self.coeffs[ref] = self.coeffs.get(ref, 0.0) + coef
        else:
            self.const += coef * float(ref)
        return self


class _Builder:
    def __init__(self):
        self.lp = LinearProgram()
        self.vmap = VarMap()
        self.binaries: list[int] = []

    def var(self, key: VarKey, lb=0.0, ub=math.inf, cost=0.0, binary=False) -> int:
        j = self.vmap.add(key)
        self.lp.add_var(key.label(), lb, ub, cost)
        if binary:
            self.binaries.append(j)
        return j

    def row(self, family: str, idx: tuple, terms, sense: str, rhs: float) -> None:
        r = _Row()
        for coef, ref in terms:
            r.add(coef, ref)
        name = f"{family}[{','.join(str(v) for v in idx)}]"
        self.lp.add_constraint(r.coeffs, sense, rhs - r.const, name)


def resolve_mode(cfg: CommunityConfig, mode: str = "cems", building=None):
    """``(building indices, pooled billing)`` for a mode specification."""
    if mode == "cems":
        return tuple(range(len(cfg.buildings))), True
    if mode == "bems":
        if building is None:
            raise InputError("bems mode needs a building")
        if isinstance(building, (int, np.integer)):
            b = int(building)
            if not 0 <= b < len(cfg.buildings):
                raise InputError(f"building index {b} out of range")
        else:
            ids = cfg.building_ids
            if building not in ids:
                raise InputError(f"unknown building {building!r}")
            b = ids.index(building)
        return (b,), False
    raise InputError(f"unknown mode {mode!r}")


def max_zones(cfg: CommunityConfig) -> int:
    return max((len(b.zones) for b in cfg.buildings), default=0)


def _build(cfg: CommunityConfig, *, level: int, k: int, kend: int, irr: np.ndarray,
           weights: np.ndarray, buildings: tuple[int, ...], pooled: bool,
           soc0: np.ndarray, temp0: np.ndarray, terminal: bool,
           commitment: FfrCommitment | None, slack: bool, num_cuts: int,
           thermal_margin: float, soc_margin_frac: float) -> BuiltModel:
    tg = cfg.time
    T, dt = tg.horizon_steps, tg.step_hours
    B, I = len(cfg.buildings), max_zones(cfg)
    S = irr.shape[0]
    pr = cfg.prices
    lam_im, lam_ex = pr.lambda_import, pr.lambda_export
    lam_comf, lam_ffr = pr.lambda_comfort, pr.lambda_ffr
    t_out = cfg.exogenous.t_out
    fixed = commitment is not None
    slack_price = SLACK_PRICE_FACTOR * float(np.max(lam_im)) if slack else 0.0
    if slack and slack_price <= 0:
        slack_price = SLACK_PRICE_FACTOR

    bld = _Builder()
    V = VarKey
    pv_kw = np.full((T, B, S), np.nan)
    constants: dict[str, np.ndarray] = {}
    offset = 0.0
    cuts: dict[tuple[int, int], ComfortCuts] = {}

    tin_const = np.full(role_shape("t_in", T, B, I, S), np.nan)
    for b in buildings:
        for i, _ in enumerate(cfg.buildings[b].zones):
            tin_const[k, b, i] = temp0[b, i]
    constants["t_in"] = tin_const

    # ---- variables -------------------------------------------------------
    for b in buildings:
        bc = cfg.buildings[b]
        ess = bc.ess
        pv_kw[:, b, :] = pv_output(bc.pv, irr).T
        e_lo, e_hi = ess.soc_min_kwh, ess.soc_max_kwh
        bld.var(V("e", k, b), soc0[b], soc0[b])
        for t in range(k, kend):
            lo, hi = e_lo, e_hi
            if terminal and t + 1 == T:
                lo = hi = ess.soc_boundary_kwh
            bld.var(V("e", t + 1, b), lo, hi)
            bld.var(V("p_ch", t, b), 0.0, ess.p_ch_max_kw)
            bld.var(V("p_dis", t, b), 0.0, ess.p_dis_max_kw)
            bld.var(V("z_ch", t, b), 0.0, 1.0, binary=True)
            bld.var(V("z_dis", t, b), 0.0, 1.0, binary=True)
            for s in range(S):
                w = weights[s]
                im_cost = 0.0 if pooled else w * dt * lam_im[t]
                ex_cost = 0.0 if pooled else -w * dt * lam_ex[t]
                bld.var(V("p_im", t, b, None, s), cost=im_cost)
                bld.var(V("p_ex", t, b, None, s), cost=ex_cost)
                if slack:
                    bld.var(V("slack_pos", t, b, None, s), cost=w * dt * slack_price)
                    bld.var(V("slack_neg", t, b, None, s), cost=w * dt * slack_price)
            if slack:
                bld.var(V("slack_soc_lo", t, b), cost=slack_price)
                bld.var(V("slack_soc_hi", t, b), cost=slack_price)
            if not fixed:
                for role in ("r_ch_up", "r_ch_dn", "r_dis_up", "r_dis_dn", "r_e_up", "r_e_dn"):
                    bld.var(V(role, t, b))
            for i, z in enumerate(bc.zones):
                bld.var(V("p_h", t, b, i), 0.0, z.p_h_max_kw)
                bld.var(V("t_in", t + 1, b, i), z.temp_min_c, z.temp_max_c)
                bld.var(V("sigma", t, b, i), -math.inf, math.inf, cost=lam_comf)
                if slack:
                    bld.var(V("slack_th_up", t, b, i), cost=dt * slack_price)
                    bld.var(V("slack_th_dn", t, b, i), cost=dt * slack_price)
                if not fixed:
                    bld.var(V("r_h_up", t, b, i))
                    bld.var(V("r_h_dn", t, b, i))
                    bld.var(V("r_up", t, b, i), cost=-lam_ffr)
                    bld.var(V("r_dn", t, b, i), cost=-lam_ffr)
    if pooled:
        for t in range(k, kend):
            for s in range(S):
                w = weights[s]
                bld.var(V("g_im", t, None, None, s), cost=w * dt * lam_im[t])
                bld.var(V("g_ex", t, None, None, s), cost=-w * dt * lam_ex[t])

    vm = bld.vmap

    def ref(role, t, b, i=None):
        if fixed and role.startswith("r_"):
            return float(getattr(commitment, role)[(t, b) if i is None else (t, b, i)])
        if role == "t_in" and t == k:
            return float(temp0[b, i])
        return vm[V(role, t, b, i)]

    if fixed:
        for role in ("r_ch_up", "r_ch_dn", "r_dis_up", "r_dis_dn", "r_e_up", "r_e_dn",
                     "r_h_up", "r_h_dn", "r_up", "r_dn"):
            src = getattr(commitment, role)
            arr = np.full(src.shape, np.nan)
            for b in buildings:
                arr[k:kend, b] = src[k:kend, b]
            constants[role] = arr
        offset = -lam_ffr * sum(
            float(np.nansum(commitment.r_up[k:kend, b] + commitment.r_dn[k:kend, b]))
            for b in buildings)

    # ---- rows ------------------------------------------------------------
    for t in range(k, kend):
        for b in buildings:
            bc = cfg.buildings[b]
            ess = bc.ess
            demand = bc.demand_load[t] + bc.demand_ev[t]
            for s in range(S):
                terms = [(1.0, vm[V("p_im", t, b, None, s)]), (-1.0, vm[V("p_ex", t, b, None, s)]),
                         (1.0, vm[V("p_dis", t, b)]), (-1.0, vm[V("p_ch", t, b)])]
                terms += [(-1.0, vm[V("p_h", t, b, i)]) for i in range(len(bc.zones))]
                if slack:
                    terms += [(1.0, vm[V("slack_pos", t, b, None, s)]),
                              (-1.0, vm[V("slack_neg", t, b, None, s)])]
                bld.row("balance", (t, b, s), terms, EQ, demand - pv_kw[t, b, s])

            for i, z in enumerate(bc.zones):
                keep, outdoor, hvac = z.etp_coefficients(dt)
                tin, tnext = ref("t_in", t, b, i), vm[V("t_in", t + 1, b, i)]
                p_h = vm[V("p_h", t, b, i)]
                drive = outdoor * t_out[t]
                bld.row("etp", (t, b, i), [(1.0, tnext), (-keep, tin), (hvac, p_h)], EQ, drive)
                rhu, rhd = ref("r_h_up", t, b, i), ref("r_h_dn", t, b, i)
                el_up = [(-hvac, vm[V("slack_th_up", t, b, i)])] if slack else []
                el_dn = [(hvac, vm[V("slack_th_dn", t, b, i)])] if slack else []
                bld.row("thermal_up", (t, b, i),
                        [(keep, tin), (-hvac, p_h), (hvac, rhu)] + el_up, LE,
                        z.temp_max_c - thermal_margin - drive)
                bld.row("thermal_dn", (t, b, i),
                        [(keep, tin), (-hvac, p_h), (-hvac, rhd)] + el_dn, GE,
                        z.temp_min_c + thermal_margin - drive)
                bld.row("hvac_up_room", (t, b, i), [(1.0, p_h), (-1.0, rhu)], GE, 0.0)
                bld.row("hvac_dn_room", (t, b, i), [(1.0, p_h), (1.0, rhd)], LE, z.p_h_max_kw)
                cc = cuts.get((b, i))
                if cc is None:
                    cc = cuts[(b, i)] = add_comfort_cuts(z, num_cuts)
                sig = vm[V("sigma", t, b, i)]
                for c_idx, (slope, icpt) in enumerate(zip(cc.slopes, cc.intercepts)):
                    bld.row("comfort_cut", (t, b, i, c_idx), [(1.0, sig), (-slope, tnext)], GE, icpt)
                if not fixed:
                    bld.row("ffr_up", (t, b, i), [(1.0, vm[V("r_up", t, b, i)]),
                                                  (-1.0, ref("r_e_up", t, b)), (-1.0, rhu)], EQ, 0.0)
                    bld.row("ffr_dn", (t, b, i), [(1.0, vm[V("r_dn", t, b, i)]),
                                                  (-1.0, ref("r_e_dn", t, b)), (-1.0, rhd)], EQ, 0.0)

            e_t, e_next = vm[V("e", t, b)], vm[V("e", t + 1, b)]
            p_ch, p_dis = vm[V("p_ch", t, b)], vm[V("p_dis", t, b)]
            z_ch, z_dis = vm[V("z_ch", t, b)], vm[V("z_dis", t, b)]
            ech, edis = ess.eta_ch, ess.eta_dis
            bld.row("ess_dyn", (t, b), [(1.0, e_next), (-1.0, e_t), (-dt * ech, p_ch),
                                        (dt / edis, p_dis)], EQ, 0.0)
            bld.row("ess_link_ch", (t, b), [(1.0, p_ch), (-ess.p_ch_max_kw, z_ch)], LE, 0.0)
            bld.row("ess_link_dis", (t, b), [(1.0, p_dis), (-ess.p_dis_max_kw, z_dis)], LE, 0.0)
            bld.row("ess_excl", (t, b), [(1.0, z_ch), (1.0, z_dis)], LE, 1.0)
            rcu, rcd = ref("r_ch_up", t, b), ref("r_ch_dn", t, b)
            rdu, rdd = ref("r_dis_up", t, b), ref("r_dis_dn", t, b)
            reu, red = ref("r_e_up", t, b), ref("r_e_dn", t, b)
            bld.row("ess_dis_up", (t, b), [(1.0, p_dis), (1.0, rdu)], LE, ess.p_dis_max_kw)
            bld.row("ess_dis_dn", (t, b), [(1.0, p_dis), (-1.0, rdd)], GE, ess.p_dis_min_kw)
            bld.row("ess_ch_up", (t, b), [(1.0, p_ch), (-1.0, rcu)], GE, ess.p_ch_min_kw)
            bld.row("ess_ch_dn", (t, b), [(1.0, p_ch), (1.0, rcd)], LE, ess.p_ch_max_kw)
            m_e = soc_margin_frac * ess.capacity_kwh
            el_lo = [(1.0, vm[V("slack_soc_lo", t, b)])] if slack else []
            el_hi = [(-1.0, vm[V("slack_soc_hi", t, b)])] if slack else []
            bld.row("ess_energy_up", (t, b),
                    [(1.0, e_t), (dt * ech, p_ch), (-dt * ech, rcu), (-dt / edis, p_dis),
                     (-dt / edis, rdu)] + el_lo, GE, ess.soc_min_kwh + m_e)
            bld.row("ess_energy_dn", (t, b),
                    [(1.0, e_t), (dt * ech, p_ch), (dt * ech, rcd), (-dt / edis, p_dis),
                     (dt / edis, rdd)] + el_hi, LE, ess.soc_max_kwh - m_e)
            bld.row("ess_headroom_lo", (t, b), [(1.0, e_next), (-dt, red)] + el_lo, GE,
                    ess.e_min_kwh + m_e)
            bld.row("ess_headroom_hi", (t, b), [(1.0, e_next), (dt, reu)] + el_hi, LE,
                    ess.e_max_kwh - m_e)
            if not fixed:
                bld.row("r_e_up_sum", (t, b), [(1.0, reu), (-1.0, rcu), (-1.0, rdu)], EQ, 0.0)
                bld.row("r_e_dn_sum", (t, b), [(1.0, red), (-1.0, rcd), (-1.0, rdd)], EQ, 0.0)

        if pooled:
            for s in range(S):
                terms = [(1.0, vm[V("g_im", t, None, None, s)]),
                         (-1.0, vm[V("g_ex", t, None, None, s)])]
                for b in buildings:
                    terms += [(-1.0, vm[V("p_im", t, b, None, s)]),
                              (1.0, vm[V("p_ex", t, b, None, s)])]
                bld.row("community", (t, s), terms, EQ, 0.0)

    milp = MilpProblem(bld.lp, bld.binaries)
    return BuiltModel(milp=milp, vmap=vm, level=level, window=(k, kend), buildings=buildings,
                      pooled=pooled, weights=np.asarray(weights, dtype=float), pv_kw=pv_kw,
                      T=T, B=B, I=I, S=S, constants=constants, objective_offset=offset,
                      fixed_reserves=fixed, slack_price=slack_price, cuts=cuts)


def _initial_temps(cfg: CommunityConfig) -> np.ndarray:
    out = np.full((len(cfg.buildings), max_zones(cfg)), np.nan)
    for b, bc in enumerate(cfg.buildings):
        for i, z in enumerate(bc.zones):
            out[b, i] = z.temp_init_c
    return out


def _margins(cfg: CommunityConfig, thermal: float, soc_frac: float) -> dict:
    if thermal < 0 or soc_frac < 0:
        raise InputError("planning margins must be >= 0")
    for bc in cfg.buildings:
        for z in bc.zones:
            if z.temp_max_c - z.temp_min_c <= 2 * thermal:
                raise InputError(f"thermal margin {thermal} leaves no room in zone {z.name} "
                                 f"of building {bc.id}")
        if bc.ess.soc_max_frac - bc.ess.soc_min_frac <= 2 * soc_frac:
            raise InputError(f"SoC margin {soc_frac} leaves no room in building {bc.id}")
    return {"thermal_margin": float(thermal), "soc_margin_frac": float(soc_frac)}


def build_level1(cfg: CommunityConfig, pv_scenario, mode: str = "cems", building=None,
                 num_cuts: int = DEFAULT_CUTS,
                 thermal_margin: float = THERMAL_MARGIN_C,
                 soc_margin_frac: float = SOC_MARGIN_FRAC) -> BuiltModel:
    """Full-day MILP that co-optimises energy cost, comfort and FFR capacity."""
    require_valid(cfg)
    T = cfg.time.horizon_steps
    irr = np.asarray(pv_scenario, dtype=float).reshape(1, -1)
    if irr.shape[1] != T:
        raise InputError(f"PV scenario has {irr.shape[1]} steps, expected {T}")
    buildings, pooled = resolve_mode(cfg, mode, building)
    soc0 = np.array([b.ess.soc_boundary_kwh for b in cfg.buildings])
    return _build(cfg, level=1, k=0, kend=T, irr=irr, weights=np.ones(1),
                  buildings=buildings, pooled=pooled, soc0=soc0, temp0=_initial_temps(cfg),
                  terminal=True, commitment=None, slack=False, num_cuts=num_cuts,
                  **_margins(cfg, thermal_margin, soc_margin_frac))


def build_level2(cfg: CommunityConfig, scenarios, k: int, N: int, commitment: FfrCommitment,
                 soc_now, temp_now, mode: str = "cems", building=None,
                 num_cuts: int = DEFAULT_CUTS, slack: bool = True,
                 thermal_margin: float = THERMAL_MARGIN_C,
                 soc_margin_frac: float = SOC_MARGIN_FRAC) -> BuiltModel:
    """Rolling-window stochastic MILP over ``[k, min(k+N, T))``.

    ``scenarios`` is a :class:`~cems.scenario.ScenarioSet`.  ``soc_now`` is
    indexed by building, ``temp_now`` by (building, zone).  Unless ``slack``
    is False, balance rows get priced slack pairs and the reserve-adjusted
    thermal and SoC rows get priced elastic terms, so a plant that drifted
    under reserve deployment cannot make the fixed commitment infeasible.
    """
    require_valid(cfg)
    T = cfg.time.horizon_steps
    if not 0 <= k < T:
        raise InputError(f"step {k} outside [0, {T})")
    if N < 1:
        raise InputError("window length must be >= 1")
    kend = min(k + N, T)
    buildings, pooled = resolve_mode(cfg, mode, building)
    zones = [len(b.zones) for b in cfg.buildings]
    commitment.check_window(k, kend, buildings, zones)
    irr = np.asarray(scenarios.scenarios, dtype=float)
    if irr.ndim != 2 or irr.shape[1] != T:
        raise InputError(f"scenario matrix must be S x {T}")
    soc_now = np.asarray(soc_now, dtype=float)
    temp_now = np.asarray(temp_now, dtype=float)
    return _build(cfg, level=2, k=k, kend=kend, irr=irr,
                  weights=np.asarray(scenarios.weights, dtype=float), buildings=buildings,
                  pooled=pooled, soc0=soc_now, temp0=temp_now.reshape(len(cfg.buildings), -1),
                  terminal=(kend == T), commitment=commitment, slack=slack, num_cuts=num_cuts,
                  **_margins(cfg, thermal_margin, soc_margin_frac))
