"""Configuration types for a building community and their validation.

Units are fixed community-wide: kW, kWh, degC and hours.  Prices are in
abstract cost units.  Every type is frozen and its array fields are made
read-only on construction, so a config can be shared freely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InputError

REFERENCE_IRRADIANCE = 1000.0
# sigma = a*T^2 + b*T + c, discomfort as a function of indoor temperature
COMFORT_COEFFS = (0.01087, -0.5541, 6.8587)
BUILDING_KINDS = ("office", "research", "residential")


def _ro(values, name: str = "series") -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise InputError(f"{name} must be one-dimensional")
    arr.setflags(write=False)
    return arr


def _set(obj, **kw):
    for k, v in kw.items():
        object.__setattr__(obj, k, v)


@dataclass(frozen=True)
class TimeGrid:
    step_hours: float = 1.0
    horizon_steps: int = 24
    rt_step_seconds: float = 2.0
    smpc_horizon_N: int = 24

    @property
    def substeps(self) -> int:
        """Real-time substeps per planning step."""
        return int(round(self.step_hours * 3600.0 / self.rt_step_seconds))

    @property
    def rt_length(self) -> int:
        return self.substeps * self.horizon_steps


@dataclass(frozen=True)
class PvParams:
    p_max_kw: float
    efficiency: float = 1.0
    reference_irradiance: float = REFERENCE_IRRADIANCE


@dataclass(frozen=True)
class HvacZoneParams:
    heat_capacity: float          # kWh/degC
    thermal_resistance: float     # degC/kW
    cop: float
    p_h_max_kw: float
    temp_min_c: float = 18.0
    temp_max_c: float = 26.0
    comfort_coeffs: tuple[float, float, float] = COMFORT_COEFFS
    temp_init_c: float = 24.0
    name: str = "z0"

    def __post_init__(self):
        _set(self, comfort_coeffs=tuple(float(c) for c in self.comfort_coeffs))

    def etp_coefficients(self, step_hours: float) -> tuple[float, float, float]:
        """``(keep, outdoor, hvac)`` such that
        ``t_next = keep*t + outdoor*T_out - hvac*p_h``."""
        cr = self.heat_capacity * self.thermal_resistance
        return (1.0 - step_hours / cr, step_hours / cr,
                step_hours * self.cop / self.heat_capacity)


@dataclass(frozen=True)
class EssParams:
    capacity_kwh: float
    eta_ch: float = 0.9
    eta_dis: float = 0.8
    p_ch_max_kw: float = 500.0
    p_dis_max_kw: float = 500.0
    p_ch_min_kw: float = 0.0
    p_dis_min_kw: float = 0.0
    soc_min_frac: float = 0.2
    soc_max_frac: float = 0.8
    soc_boundary_frac: float = 0.5
    e_min_kwh: float | None = None
    e_max_kwh: float | None = None

    def __post_init__(self):
        if self.e_min_kwh is None:
            _set(self, e_min_kwh=self.soc_min_frac * self.capacity_kwh)
        if self.e_max_kwh is None:
            _set(self, e_max_kwh=self.soc_max_frac * self.capacity_kwh)

    @property
    def soc_min_kwh(self) -> float:
        return self.soc_min_frac * self.capacity_kwh

    @property
    def soc_max_kwh(self) -> float:
        return self.soc_max_frac * self.capacity_kwh

    @property
    def soc_boundary_kwh(self) -> float:
        return self.soc_boundary_frac * self.capacity_kwh


@dataclass(frozen=True)
class BuildingConfig:
    id: str
    kind: str
    zones: tuple[HvacZoneParams, ...]
    ess: EssParams
    pv: PvParams
    demand_load: np.ndarray
    demand_ev: np.ndarray

    def __post_init__(self):
        _set(self, zones=tuple(self.zones),
             demand_load=_ro(self.demand_load, f"{self.id}.demand_load"),
             demand_ev=_ro(self.demand_ev, f"{self.id}.demand_ev"))


@dataclass(frozen=True)
class PriceSchedule:
    lambda_import: np.ndarray
    lambda_export: np.ndarray
    lambda_comfort: float = 0.0
    lambda_ffr: float = 0.0

    def __post_init__(self):
        _set(self, lambda_import=_ro(self.lambda_import, "lambda_import"),
             lambda_export=_ro(self.lambda_export, "lambda_export"))


@dataclass(frozen=True)
class ExogenousData:
    t_out: np.ndarray
    clear_sky_irr: np.ndarray
    reg_signal: np.ndarray
    truth_irr: np.ndarray | None = None

    def __post_init__(self):
        _set(self, t_out=_ro(self.t_out, "t_out"),
             clear_sky_irr=_ro(self.clear_sky_irr, "clear_sky_irr"),
             reg_signal=_ro(self.reg_signal, "reg_signal"))
        if self.truth_irr is not None:
            _set(self, truth_irr=_ro(self.truth_irr, "truth_irr"))


@dataclass(frozen=True)
class ScenarioSettings:
    count: int = 10
    marginal_std: float = 0.15
    corr_length_hours: float = 2.0


@dataclass(frozen=True)
class CommunityConfig:
    time: TimeGrid
    buildings: tuple[BuildingConfig, ...]
    prices: PriceSchedule
    exogenous: ExogenousData
    scenarios: ScenarioSettings = field(default_factory=ScenarioSettings)
    name: str = "community"

    def __post_init__(self):
        _set(self, buildings=tuple(self.buildings))

    @property
    def building_ids(self) -> list[str]:
        return [b.id for b in self.buildings]

    def building(self, bid: str) -> BuildingConfig:
        for b in self.buildings:
            if b.id == bid:
                return b
        raise InputError(f"unknown building {bid!r}")

    def subset(self, bid: str) -> "CommunityConfig":
        """Copy holding only building ``bid``."""
        from dataclasses import replace
        return replace(self, buildings=(self.building(bid),))


@dataclass(frozen=True)
class Violation:
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


def pv_output(pv: PvParams, irradiance):
    """MPPT output ``p_max * G / 1000 * efficiency`` in kW."""
    g = np.asarray(irradiance, dtype=float)
    if np.any(g < 0) or np.any(np.isnan(g)):
        raise InputError("irradiance must be non-negative")
    p = pv.p_max_kw * (g / pv.reference_irradiance) * pv.efficiency
    return float(p) if p.ndim == 0 else p


def comfort_sigma(t_in, coeffs: Sequence[float] = COMFORT_COEFFS):
    a, b, c = coeffs
    t = np.asarray(t_in, dtype=float)
    s = a * t * t + b * t + c
    return float(s) if s.ndim == 0 else s


def _check_series(out, path, arr, length, nonneg=True):
    if len(arr) != length:
        out.append(Violation(path, f"length {len(arr)} != {length}"))
    if np.any(~np.isfinite(arr)):
        out.append(Violation(path, "non-finite values"))
    elif nonneg and np.any(arr < 0):
        out.append(Violation(path, "negative values"))


def validate_config(cfg: CommunityConfig) -> list[Violation]:
    """Every invariant violation in ``cfg``; an empty list means well-posed."""
    out: list[Violation] = []
    tg = cfg.time
    day = tg.step_hours * tg.horizon_steps
    if not math.isclose(day, 24.0, rel_tol=0, abs_tol=1e-9):
        out.append(Violation("time", f"step_hours*horizon_steps = {day} h, not 24 h"))
    if tg.rt_step_seconds <= 0:
        out.append(Violation("time.rt_step_seconds", "must be positive"))
    else:
        ratio = tg.step_hours * 3600.0 / tg.rt_step_seconds
        if not math.isclose(ratio, round(ratio), abs_tol=1e-9):
            out.append(Violation("time.rt_step_seconds",
                                 f"does not divide the {tg.step_hours} h step"))
    if not 1 <= tg.smpc_horizon_N <= tg.horizon_steps:
        out.append(Violation("time.smpc_horizon_N",
                             f"{tg.smpc_horizon_N} outside [1, {tg.horizon_steps}]"))

    T = tg.horizon_steps
    if not cfg.buildings:
        out.append(Violation("buildings", "no buildings"))
    seen = set()
    for bi, b in enumerate(cfg.buildings):
        bp = f"buildings[{bi}]"
        if b.id in seen:
            out.append(Violation(f"{bp}.id", f"duplicate id {b.id!r}"))
        seen.add(b.id)
        if b.kind not in BUILDING_KINDS:
            out.append(Violation(f"{bp}.kind", f"{b.kind!r} not in {BUILDING_KINDS}"))
        _check_series(out, f"{bp}.demand_load", b.demand_load, T)
        _check_series(out, f"{bp}.demand_ev", b.demand_ev, T)
        if b.pv.p_max_kw <= 0:
            out.append(Violation(f"{bp}.pv.p_max_kw", "must be > 0"))
        if not 0 < b.pv.efficiency <= 1:
            out.append(Violation(f"{bp}.pv.efficiency", "must lie in (0, 1]"))
        if not b.zones:
            out.append(Violation(f"{bp}.zones", "empty zone list"))
        for zi, z in enumerate(b.zones):
            zp = f"{bp}.zones[{zi}]"
            if z.heat_capacity <= 0 or z.thermal_resistance <= 0:
                out.append(Violation(zp, "heat_capacity and thermal_resistance must be > 0"))
            elif z.heat_capacity * z.thermal_resistance <= tg.step_hours:
                out.append(Violation(
                    f"{zp}.heat_capacity*thermal_resistance",
                    f"C*R = {z.heat_capacity * z.thermal_resistance:g} h must exceed the "
                    f"{tg.step_hours:g} h step for a stable discrete update"))
            if z.cop <= 0:
                out.append(Violation(f"{zp}.cop", "must be > 0"))
            if z.p_h_max_kw <= 0:
                out.append(Violation(f"{zp}.p_h_max_kw", "must be > 0"))
            if not z.temp_min_c < z.temp_max_c:
                out.append(Violation(f"{zp}.temp_min_c/temp_max_c",
                                     f"empty comfort interval [{z.temp_min_c}, {z.temp_max_c}]"))
            elif not z.temp_min_c <= z.temp_init_c <= z.temp_max_c:
                out.append(Violation(f"{zp}.temp_init_c", "outside the comfort interval"))
            if len(z.comfort_coeffs) != 3 or z.comfort_coeffs[0] <= 0:
                out.append(Violation(f"{zp}.comfort_coeffs", "quadratic coefficient must be > 0"))
        e = b.ess
        ep = f"{bp}.ess"
        if e.capacity_kwh <= 0:
            out.append(Violation(f"{ep}.capacity_kwh", "must be > 0"))
        for nm in ("eta_ch", "eta_dis"):
            if not 0 < getattr(e, nm) <= 1:
                out.append(Violation(f"{ep}.{nm}", "must lie in (0, 1]"))
        if not 0 <= e.soc_min_frac < e.soc_boundary_frac < e.soc_max_frac <= 1:
            out.append(Violation(f"{ep}.soc_*_frac",
                                 "need 0 <= soc_min < soc_boundary < soc_max <= 1"))
        if e.e_min_kwh < e.soc_min_kwh - 1e-9:
            out.append(Violation(f"{ep}.e_min_kwh", "below soc_min_frac*capacity"))
        if e.e_max_kwh > e.soc_max_kwh + 1e-9:
            out.append(Violation(f"{ep}.e_max_kwh", "above soc_max_frac*capacity"))
        for lo, hi in (("p_ch_min_kw", "p_ch_max_kw"), ("p_dis_min_kw", "p_dis_max_kw")):
            if not 0 <= getattr(e, lo) <= getattr(e, hi):
                out.append(Violation(f"{ep}.{lo}/{hi}", "need 0 <= min <= max"))

    pr = cfg.prices
    _check_series(out, "prices.lambda_import", pr.lambda_import, T)
    _check_series(out, "prices.lambda_export", pr.lambda_export, T)
    if len(pr.lambda_import) == len(pr.lambda_export):
        bad = np.flatnonzero(pr.lambda_export > pr.lambda_import)
        if bad.size:
            out.append(Violation("prices.lambda_export",
                                 f"exceeds lambda_import at steps {bad.tolist()}"))
    for nm in ("lambda_comfort", "lambda_ffr"):
        v = getattr(pr, nm)
        if not (math.isfinite(v) and v >= 0):
            out.append(Violation(f"prices.{nm}", "must be a finite value >= 0"))

    ex = cfg.exogenous
    _check_series(out, "exogenous.t_out", ex.t_out, T, nonneg=False)
    _check_series(out, "exogenous.clear_sky_irr", ex.clear_sky_irr, T)
    if len(ex.reg_signal) != tg.rt_length:
        out.append(Violation("exogenous.reg_signal",
                             f"length {len(ex.reg_signal)} != {tg.rt_length}"))
    if np.any(~np.isfinite(ex.reg_signal)) or np.any(np.abs(ex.reg_signal) > 1):
        out.append(Violation("exogenous.reg_signal", "values outside [-1, 1]"))
    if ex.truth_irr is not None:
        _check_series(out, "exogenous.truth_irr", ex.truth_irr, T)

    sc = cfg.scenarios
    if sc.count < 1:
        out.append(Violation("scenarios.count", "must be >= 1"))
    if sc.marginal_std < 0:
        out.append(Violation("scenarios.marginal_std", "must be >= 0"))
    if sc.corr_length_hours <= 0:
        out.append(Violation("scenarios.corr_length_hours", "must be > 0"))
    return out


def require_valid(cfg: CommunityConfig) -> None:
    problems = validate_config(cfg)
    if problems:
        raise InputError("invalid configuration:\n  " + "\n  ".join(map(str, problems)))
