"""Synthetic desk-scale datasets.

``bundled`` mimics a three-building campus: an office, a research building and
a residential block, 1 MWh of storage each, 10 MW of PV split 4/4/2 and a
hot-day outdoor temperature.  The research building is heavy enough that the
community as a whole never exports under clear sky, while the office and the
residential block have midday PV surplus of their own.  Tariffs are a synthetic time-of-use shape and
the regulation signal is a triangle wave plus noise, so nothing here is tied
to a particular utility or grid operator.
"""

from __future__ import annotations

import numpy as np

from .domain import (BuildingConfig, CommunityConfig, EssParams, ExogenousData,
                     HvacZoneParams, PriceSchedule, PvParams, ScenarioSettings,
                     TimeGrid)
from .errors import InputError

HOURS = np.arange(24)


def clear_sky_profile(peak: float = 950.0, sunrise: float = 6.0, sunset: float = 19.0,
                      steps: int = 24) -> np.ndarray:
    mid = (np.arange(steps) + 0.5) * 24.0 / steps
    x = (mid - sunrise) / (sunset - sunrise)
    g = peak * np.sin(np.pi * np.clip(x, 0.0, 1.0))
    g[(x <= 0) | (x >= 1)] = 0.0
    return np.round(g, 6)


def outdoor_temperature(mean: float = 27.0, amplitude: float = 6.0,
                        peak_hour: float = 15.0) -> np.ndarray:
    return np.round(mean + amplitude * np.cos(2 * np.pi * (HOURS - peak_hour) / 24.0), 6)


def regulation_signal(time: TimeGrid, seed: int = 20240, period_s: float = 600.0,
                      noise: float = 0.15) -> np.ndarray:
    """Zero-mean triangle wave with additive Gaussian noise, clipped to [-1, 1]."""
    n = time.rt_length
    t = np.arange(n) * time.rt_step_seconds
    phase = (t % period_s) / period_s
    tri = 4.0 * np.abs(phase - 0.5) - 1.0
    rng = np.random.default_rng(seed)
    sig = 0.85 * tri + noise * rng.standard_normal(n)
    return np.round(np.clip(sig, -1.0, 1.0), 6)


def _tou_import() -> np.ndarray:
    p = np.full(24, 0.09)
    p[8:11] = 0.14
    p[11:17] = 0.22
    p[17:22] = 0.14
    return p


def _block(base: float, value: float, start: int, stop: int) -> np.ndarray:
    arr = np.full(24, base)
    arr[start:stop] = value
    return arr


def bundled(smpc_horizon: int = 24, scenario_count: int = 10) -> CommunityConfig:
    time = TimeGrid(step_hours=1.0, horizon_steps=24, rt_step_seconds=2.0,
                    smpc_horizon_N=smpc_horizon)
    office_load = _block(600.0, 2800.0, 9, 18)
    office_load[8] = office_load[18] = 1500.0
    research_load = _block(2600.0, 4800.0, 8, 20)
    res_load = np.full(24, 800.0)
    res_load[6:9] = 1200.0
    res_load[9:17] = 650.0
    res_load[18:23] = 1800.0
    buildings = (
        BuildingConfig(
            id="office", kind="office",
            zones=(HvacZoneParams(heat_capacity=120.0, thermal_resistance=0.035, cop=3.0,
                                  p_h_max_kw=100.0, temp_init_c=24.0, name="office-z0"),),
            ess=EssParams(capacity_kwh=1000.0, eta_ch=0.9, eta_dis=0.8,
                          p_ch_max_kw=500.0, p_dis_max_kw=500.0),
            pv=PvParams(p_max_kw=4000.0, efficiency=0.9),
            demand_load=office_load,
            demand_ev=_block(0.0, 200.0, 9, 17)),
        BuildingConfig(
            id="research", kind="research",
            zones=(HvacZoneParams(heat_capacity=200.0, thermal_resistance=0.023, cop=3.0,
                                  p_h_max_kw=150.0, temp_init_c=24.0, name="research-z0"),),
            ess=EssParams(capacity_kwh=1000.0, eta_ch=0.9, eta_dis=0.8,
                          p_ch_max_kw=500.0, p_dis_max_kw=500.0),
            pv=PvParams(p_max_kw=4000.0, efficiency=0.9),
            demand_load=research_load,
            demand_ev=np.zeros(24)),
        BuildingConfig(
            id="residential", kind="residential",
            zones=(HvacZoneParams(heat_capacity=60.0, thermal_resistance=0.07, cop=3.0,
                                  p_h_max_kw=50.0, temp_init_c=24.0, name="residential-z0"),),
            ess=EssParams(capacity_kwh=1000.0, eta_ch=0.9, eta_dis=0.8,
                          p_ch_max_kw=500.0, p_dis_max_kw=500.0),
            pv=PvParams(p_max_kw=2000.0, efficiency=0.9),
            demand_load=res_load,
            demand_ev=_block(0.0, 300.0, 19, 23)),
    )
    prices = PriceSchedule(lambda_import=_tou_import(), lambda_export=np.full(24, 0.06),
                           lambda_comfort=2000.0, lambda_ffr=0.015)
    exo = ExogenousData(t_out=outdoor_temperature(), clear_sky_irr=clear_sky_profile(),
                        reg_signal=regulation_signal(time))
    return CommunityConfig(time=time, buildings=buildings, prices=prices, exogenous=exo,
                           scenarios=ScenarioSettings(count=scenario_count),
                           name="bundled")


def zero_demand(lambda_ffr: float = 0.0) -> CommunityConfig:
    """One building, no load, flat prices, mild weather; a degenerate sanity case."""
    time = TimeGrid()
    b = BuildingConfig(
        id="solo", kind="office",
        zones=(HvacZoneParams(heat_capacity=100.0, thermal_resistance=0.05, cop=3.0,
                              p_h_max_kw=50.0, temp_init_c=24.0),),
        ess=EssParams(capacity_kwh=1000.0),
        pv=PvParams(p_max_kw=1000.0, efficiency=0.9),
        demand_load=np.zeros(24), demand_ev=np.zeros(24))
    prices = PriceSchedule(lambda_import=np.full(24, 0.1), lambda_export=np.full(24, 0.1),
                           lambda_comfort=0.0, lambda_ffr=lambda_ffr)
    exo = ExogenousData(t_out=np.full(24, 24.0), clear_sky_irr=np.zeros(24),
                        reg_signal=np.zeros(time.rt_length))
    return CommunityConfig(time=time, buildings=(b,), prices=prices, exogenous=exo,
                           scenarios=ScenarioSettings(count=1, marginal_std=0.0),
                           name="zero-demand")


DATASETS = {"bundled": bundled, "zero-demand": zero_demand}


def load_dataset(name: str) -> CommunityConfig:
    try:
        return DATASETS[name]()
    except KeyError:
        raise InputError(f"unknown dataset {name!r}; choose from {sorted(DATASETS)}") from None
