import dataclasses as dc
import time

import numpy as np
import pytest

from cems.datasets import bundled
from cems.domain import (BuildingConfig, CommunityConfig, EssParams, ExogenousData,
                         HvacZoneParams, PriceSchedule, PvParams, ScenarioSettings,
                         TimeGrid)


def small_config(*, steps=24, demand=0.0, clear_sky=None, lambda_ffr=0.0,
                 lambda_comfort=100.0, t_out=28.0, reg=None, zones=None,
                 scenarios=1, std=0.0, p_ch_max=200.0, p_dis_max=200.0):
    """One building with a 400 kWh battery; fast enough for per-test solves."""
    step_h = 24.0 / steps
    time = TimeGrid(step_hours=step_h, horizon_steps=steps, rt_step_seconds=step_h * 3600 / 4,
                    smpc_horizon_N=steps)
    zones = zones or (HvacZoneParams(heat_capacity=100.0, thermal_resistance=0.2 * step_h,
                                     cop=3.0, p_h_max_kw=40.0, temp_init_c=24.0),)
    b = BuildingConfig(
        id="b0", kind="office", zones=zones,
        ess=EssParams(capacity_kwh=400.0, p_ch_max_kw=p_ch_max, p_dis_max_kw=p_dis_max),
        pv=PvParams(p_max_kw=300.0, efficiency=0.9),
        demand_load=np.full(steps, demand), demand_ev=np.zeros(steps))
    prices = PriceSchedule(lambda_import=np.full(steps, 0.1),
                           lambda_export=np.full(steps, 0.05),
                           lambda_comfort=lambda_comfort, lambda_ffr=lambda_ffr)
    exo = ExogenousData(t_out=np.full(steps, t_out),
                        clear_sky_irr=np.zeros(steps) if clear_sky is None else clear_sky,
                        reg_signal=np.zeros(time.rt_length) if reg is None else reg)
    return CommunityConfig(time=time, buildings=(b,), prices=prices, exogenous=exo,
                           scenarios=ScenarioSettings(count=scenarios, marginal_std=std),
                           name="small")


def deterministic(cfg: CommunityConfig) -> CommunityConfig:
    """Single zero-variance scenario and a flat-zero regulation signal."""
    exo = dc.replace(cfg.exogenous, reg_signal=np.zeros_like(cfg.exogenous.reg_signal))
    return dc.replace(cfg, exogenous=exo,
                      scenarios=dc.replace(cfg.scenarios, count=1, marginal_std=0.0))


@pytest.fixture(scope="session")
def bundled_cfg():
    return bundled()


# wall-clock seconds of the expensive session fixtures, read by the acceptance suite
TIMINGS: dict[str, float] = {}
# (criterion, passed, detail) lines printed after the run
ACCEPTANCE: list[tuple[int, bool, str]] = []


@pytest.fixture(scope="session")
def cems_trace(bundled_cfg):
    from cems.control import simulate_day
    t0 = time.perf_counter()
    trace = simulate_day(bundled_cfg, seed=7, mode="cems")
    TIMINGS["cems_day"] = time.perf_counter() - t0
    return trace


@pytest.fixture(scope="session")
def bems_trace(bundled_cfg):
    from cems.control import simulate_day
    return simulate_day(bundled_cfg, seed=7, mode="bems")


@pytest.fixture(scope="session")
def cems_metrics(cems_trace):
    from cems.control import compute_metrics
    return compute_metrics(cems_trace)


@pytest.fixture(scope="session")
def bems_metrics(bems_trace):
    from cems.control import compute_metrics
    return compute_metrics(bems_trace)


@pytest.fixture(scope="session")
def deterministic_trace(bundled_cfg):
    from cems.control import simulate_day
    return simulate_day(deterministic(bundled_cfg), seed=0, mode="cems")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
