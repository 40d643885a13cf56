"""Ground-truth plant: ETP zone temperatures and ESS state of charge."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..domain import CommunityConfig, comfort_sigma
from ..model.formulation import max_zones

BOUND_TOL = 1e-6


@dataclass(frozen=True)
class PlantState:
    soc: np.ndarray          # (B,) kWh
    t_in: np.ndarray         # (B, I) degC, NaN for absent zones
    step: int = 0

    def __post_init__(self):
        for name in ("soc", "t_in"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def initial(cls, cfg: CommunityConfig) -> "PlantState":
        soc = np.array([b.ess.soc_boundary_kwh for b in cfg.buildings])
        t_in = np.full((len(cfg.buildings), max_zones(cfg)), np.nan)
        for b, bc in enumerate(cfg.buildings):
            for i, z in enumerate(bc.zones):
                t_in[b, i] = z.temp_init_c
        return cls(soc, t_in, 0)


@dataclass(frozen=True)
class DeviceControls:
    """Step-average set points; ``p_h`` is NaN for absent zones."""

    p_ch: np.ndarray         # (B,)
    p_dis: np.ndarray        # (B,)
    p_h: np.ndarray          # (B, I)

    def __post_init__(self):
        for name in ("p_ch", "p_dis", "p_h"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def net_load(self) -> np.ndarray:
        """Device contribution to each building's grid draw (kW)."""
        return self.p_ch - self.p_dis + np.nansum(self.p_h, axis=1)


@dataclass(frozen=True)
class PlantLog:
    soc_clipped: np.ndarray          # (B,) bool
    soc_violation: np.ndarray        # (B,) kWh outside [soc_min, soc_max]
    temp_violation: np.ndarray       # (B, I) degC outside [temp_min, temp_max]
    sigma_true: np.ndarray           # (B, I) quadratic discomfort at the new temperature


def plant_step(cfg: CommunityConfig, state: PlantState, controls: DeviceControls,
               buildings=None) -> tuple[PlantState, PlantLog]:
    """Advance one control step with the executed, step-averaged controls.

    Buildings not listed in ``buildings`` keep their state.  The SoC is
    clipped to the physical range [0, E]; clipping and corridor violations
    are reported in the log, never raised.
    """
    dt = cfg.time.step_hours
    k = state.step
    t_out = cfg.exogenous.t_out[k]
    B = len(cfg.buildings)
    blds = range(B) if buildings is None else buildings
    soc = state.soc.copy()
    t_in = state.t_in.copy()
    clipped = np.zeros(B, dtype=bool)
    soc_viol = np.zeros(B)
    temp_viol = np.zeros_like(t_in)
    sigma = np.full_like(t_in, np.nan)
    for b in blds:
        bc = cfg.buildings[b]
        ess = bc.ess
        e = soc[b] + dt * ess.eta_ch * controls.p_ch[b] - dt * controls.p_dis[b] / ess.eta_dis
        if e < 0.0 or e > ess.capacity_kwh:
            clipped[b] = True
            e = min(max(e, 0.0), ess.capacity_kwh)
        soc[b] = e
        soc_viol[b] = max(ess.soc_min_kwh - e, e - ess.soc_max_kwh, 0.0)
        for i, z in enumerate(bc.zones):
            keep, outdoor, hvac = z.etp_coefficients(dt)
            t_new = keep * t_in[b, i] + outdoor * t_out - hvac * controls.p_h[b, i]
            t_in[b, i] = t_new
            temp_viol[b, i] = max(z.temp_min_c - t_new, t_new - z.temp_max_c, 0.0)
            sigma[b, i] = comfort_sigma(t_new, z.comfort_coeffs)
    return (PlantState(soc, t_in, k + 1),
            PlantLog(clipped, soc_viol, temp_viol, sigma))
