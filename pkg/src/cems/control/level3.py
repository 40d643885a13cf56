"""Level 3: real-time FFR deployment on top of the Level-2 set points.

For a regulation value ``w`` in [-1, 1], positive values call the up-reserve
(less consumption) and negative values the down-reserve.  The deployed amount
``w+ * r_up - w- * r_dn`` is split between devices in proportion to their
committed shares: the ESS part moves charge and discharge power by their own
committed components, the HVAC part moves the zone's compressor power.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InputError
from .plant import DeviceControls

HONOR_TOL = 1e-9


@dataclass(frozen=True)
class ReserveSlice:
    """Committed reserves for a single step; ESS parts per building, HVAC per zone."""

    r_ch_up: np.ndarray
    r_ch_dn: np.ndarray
    r_dis_up: np.ndarray
    r_dis_dn: np.ndarray
    r_e_up: np.ndarray
    r_e_dn: np.ndarray
    r_h_up: np.ndarray
    r_h_dn: np.ndarray
    r_up: np.ndarray
    r_dn: np.ndarray

    @classmethod
    def from_commitment(cls, commitment, k: int) -> "ReserveSlice":
        names = cls.__dataclass_fields__
        return cls(**{n: np.nan_to_num(np.asarray(getattr(commitment, n)[k], dtype=float))
                      for n in names})


@dataclass(frozen=True)
class Level3Result:
    reg: np.ndarray             # (n,)
    p_ch: np.ndarray            # (n, B)
    p_dis: np.ndarray           # (n, B)
    p_h: np.ndarray             # (n, B, I)
    ess_up: np.ndarray          # (n, B) delivered up by the ESS
    ess_dn: np.ndarray
    hvac_up: np.ndarray         # (n, B, I)
    hvac_dn: np.ndarray
    deployed_up: np.ndarray     # (n, B, I) delivered on behalf of each zone's r_up
    deployed_dn: np.ndarray
    saturated: int              # substeps x devices where a device limit clipped deployment
    honor_violations: int

    def mean_controls(self) -> DeviceControls:
        return DeviceControls(self.p_ch.mean(axis=0), self.p_dis.mean(axis=0),
                              self.p_h.mean(axis=0))

    @property
    def substeps(self) -> int:
        return len(self.reg)


def run_level3(controls: DeviceControls, reserves: ReserveSlice, reg, *,
               p_ch_max=None, p_dis_max=None, p_h_max=None) -> Level3Result:
    """Vectorised deployment of ``reg`` (one value per substep) over one step.

    Device limits, when given, saturate the adjusted set points; each clipped
    (substep, device) pair is counted in ``saturated``.  In multi-zone
    buildings every zone's ``r_up`` counts the building's ESS reserve, but the
    ESS is physically deployed once per building.
    """
    w = np.asarray(reg, dtype=float)
    if w.ndim != 1:
        raise InputError("regulation signal must be one-dimensional")
    if np.any(~np.isfinite(w)) or np.any(np.abs(w) > 1.0):
        raise InputError("regulation signal values must lie in [-1, 1]")
    up = np.maximum(w, 0.0)[:, None]
    dn = np.maximum(-w, 0.0)[:, None]
    r = reserves

    p_ch = controls.p_ch[None, :] - up * r.r_ch_up + dn * r.r_ch_dn
    p_dis = controls.p_dis[None, :] + up * r.r_dis_up - dn * r.r_dis_dn
    up3, dn3 = up[:, :, None], dn[:, :, None]
    p_h = controls.p_h[None] - up3 * r.r_h_up + dn3 * r.r_h_dn

    saturated = 0
    if p_ch_max is not None:
        bad = (p_ch < 0) | (p_ch > np.asarray(p_ch_max)[None, :])
        saturated += int(bad.sum())
        p_ch = np.clip(p_ch, 0.0, np.asarray(p_ch_max)[None, :])
    if p_dis_max is not None:
        bad = (p_dis < 0) | (p_dis > np.asarray(p_dis_max)[None, :])
        saturated += int(bad.sum())
        p_dis = np.clip(p_dis, 0.0, np.asarray(p_dis_max)[None, :])
    if p_h_max is not None:
        cap = np.asarray(p_h_max)[None]
        bad = (p_h < 0) | (p_h > cap)
        saturated += int(np.nansum(bad))
        p_h = np.where(np.isnan(p_h), np.nan, np.clip(p_h, 0.0, cap))

    # what each device actually delivered, measured from the set-point change
    d_ess = (controls.p_ch[None, :] - p_ch) + (p_dis - controls.p_dis[None, :])
    ess_up = np.where(up > 0, np.maximum(d_ess, 0.0), 0.0)
    ess_dn = np.where(dn > 0, np.maximum(-d_ess, 0.0), 0.0)
    d_h = controls.p_h[None] - p_h
    hvac_up = np.where(up3 > 0, np.maximum(np.nan_to_num(d_h), 0.0), 0.0)
    hvac_dn = np.where(dn3 > 0, np.maximum(-np.nan_to_num(d_h), 0.0), 0.0)
    dep_up = ess_up[:, :, None] + hvac_up
    dep_dn = ess_dn[:, :, None] + hvac_dn
    zone = ~np.isnan(controls.p_h)[None]
    dep_up = np.where(zone, dep_up, 0.0)
    dep_dn = np.where(zone, dep_dn, 0.0)

    viol = ((dep_up > r.r_up[None] + HONOR_TOL) | (dep_dn > r.r_dn[None] + HONOR_TOL)
            | ((ess_up[:, :, None] > r.r_e_up[None, :, None] + HONOR_TOL) & zone)
            | (hvac_up > np.nan_to_num(r.r_h_up)[None] + HONOR_TOL)
            | (hvac_dn > np.nan_to_num(r.r_h_dn)[None] + HONOR_TOL))
    return Level3Result(reg=w, p_ch=p_ch, p_dis=p_dis, p_h=p_h, ess_up=ess_up, ess_dn=ess_dn,
                        hvac_up=hvac_up, hvac_dn=hvac_dn, deployed_up=dep_up,
                        deployed_dn=dep_dn, saturated=saturated,
                        honor_violations=int(viol.sum()))
