"""Typed views of solved models: per-role series and the FFR commitment."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError, StateError
from ..lpcore import OPTIMAL, Solution
from .varmap import (BINARY_ROLES, RESERVE_ROLES_TB, RESERVE_ROLES_TBI,
                     ROLE_DIMS, VarMap)


def role_shape(role: str, T: int, B: int, I: int, S: int) -> tuple[int, ...]:
    size = {"t": T, "t1": T + 1, "b": B, "i": I, "s": S}
    return tuple(size[d] for d in ROLE_DIMS[role])


@dataclass
class Schedule:
    """Per-role arrays over the full day; NaN marks entries outside the model.

    Roles that the model did not emit at all (for example the community grid
    variables of a single-building model) are absent: :meth:`get` returns
    ``None`` for them.
    """

    series: dict[str, np.ndarray]
    window: tuple[int, int]
    buildings: tuple[int, ...]
    pooled: bool
    weights: np.ndarray
    objective: float = 0.0
    pv_kw: np.ndarray | None = None          # (T, B, S)
    fixed_reserves: bool = False

    def __getitem__(self, role: str) -> np.ndarray:
        return self.series[role]

    def get(self, role: str):
        return self.series.get(role)

    def __contains__(self, role: str) -> bool:
        return role in self.series

    @property
    def num_scenarios(self) -> int:
        return len(self.weights)

    def at(self, role: str, t: int) -> np.ndarray:
        return self.series[role][t]


@dataclass(frozen=True)
class FfrCommitment:
    """Committed reserves per step; ESS parts per (t, b), HVAC and totals per (t, b, i)."""

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
    buildings: tuple[int, ...] = field(default=())

    def __post_init__(self):
        for name in RESERVE_ROLES_TB + RESERVE_ROLES_TBI:
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_schedule(cls, sched: Schedule) -> "FfrCommitment":
        missing = [r for r in RESERVE_ROLES_TB + RESERVE_ROLES_TBI if r not in sched]
        if missing:
            raise InputError(f"schedule has no reserve series {missing}")
        vals = {r: sched[r] for r in RESERVE_ROLES_TB + RESERVE_ROLES_TBI}
        return cls(**vals, buildings=tuple(sched.buildings))

    @classmethod
    def merge(cls, parts: list["FfrCommitment"]) -> "FfrCommitment":
        """Combine commitments built for disjoint building subsets."""
        out = {}
        for name in RESERVE_ROLES_TB + RESERVE_ROLES_TBI:
            arr = np.array(getattr(parts[0], name), dtype=float)
            for p in parts[1:]:
                for b in p.buildings:
                    arr[:, b] = getattr(p, name)[:, b]
            out[name] = arr
        blds = tuple(sorted({b for p in parts for b in p.buildings}))
        return cls(**out, buildings=blds)

    def check_window(self, k: int, kend: int, buildings, zones_per_building) -> None:
        for name in RESERVE_ROLES_TB:
            arr = getattr(self, name)
            if arr.shape[0] < kend:
                raise InputError(f"commitment {name} covers {arr.shape[0]} steps, need {kend}")
            for b in buildings:
                if not np.all(np.isfinite(arr[k:kend, b])):
                    raise InputError(f"commitment {name} missing entries for building {b}")
        for name in RESERVE_ROLES_TBI:
            arr = getattr(self, name)
            for b in buildings:
                n = zones_per_building[b]
                if not np.all(np.isfinite(arr[k:kend, b, :n])):
                    raise InputError(f"commitment {name} missing entries for building {b}")

    def total(self) -> float:
        """Committed up + down capacity summed over steps, buildings and zones (kW*step)."""
        return float(np.nansum(self.r_up) + np.nansum(self.r_dn))

    def hvac_total(self) -> np.ndarray:
        return np.nansum(self.r_h_up + self.r_h_dn, axis=(1, 2))


def extract_schedule(sol: Solution, model) -> Schedule:
    """Invert the variable map of ``model`` onto full-day arrays.

    Binaries are rounded to {0, 1}; they are integral to within the solver's
    integrality tolerance by contract.
    """
    if sol.status != OPTIMAL:
        raise StateError(f"cannot extract a schedule from a {sol.status} solution")
    vmap: VarMap = model.vmap
    T, B, I, S = model.T, model.B, model.I, model.S
    series: dict[str, np.ndarray] = {}
    for j, key in enumerate(vmap.keys()):
        arr = series.get(key.role)
        if arr is None:
            arr = np.full(role_shape(key.role, T, B, I, S), np.nan)
            series[key.role] = arr
        v = sol.primal[j]
        if key.role in BINARY_ROLES:
            v = float(np.round(v))
        idx = tuple(getattr(key, d.rstrip("1")) for d in ROLE_DIMS[key.role])
        arr[idx] = v
    # data that the model treated as constants
    for role, arr in model.constants.items():
        cur = series.get(role)
        if cur is None:
            series[role] = arr.copy()
        else:
            fill = np.isnan(cur) & ~np.isnan(arr)
            cur[fill] = arr[fill]
    return Schedule(series=series, window=model.window, buildings=model.buildings,
                    pooled=model.pooled, weights=model.weights.copy(),
                    objective=sol.objective_value + model.objective_offset,
                    pv_kw=model.pv_kw, fixed_reserves=model.fixed_reserves)
