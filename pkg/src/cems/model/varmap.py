"""Bookkeeping between model symbols and LP column indices."""

from __future__ import annotations

from typing import NamedTuple

from ..errors import InputError

# role -> index dimensions; "t1" marks state roles indexed over 0..T
ROLE_DIMS: dict[str, tuple[str, ...]] = {
    "p_im": ("t", "b", "s"), "p_ex": ("t", "b", "s"),
    "slack_pos": ("t", "b", "s"), "slack_neg": ("t", "b", "s"),
    "g_im": ("t", "s"), "g_ex": ("t", "s"),
    "p_ch": ("t", "b"), "p_dis": ("t", "b"),
    "z_ch": ("t", "b"), "z_dis": ("t", "b"),
    "e": ("t1", "b"),
    "r_ch_up": ("t", "b"), "r_ch_dn": ("t", "b"),
    "r_dis_up": ("t", "b"), "r_dis_dn": ("t", "b"),
    "r_e_up": ("t", "b"), "r_e_dn": ("t", "b"),
    "p_h": ("t", "b", "i"), "sigma": ("t", "b", "i"), "t_in": ("t1", "b", "i"),
    "r_h_up": ("t", "b", "i"), "r_h_dn": ("t", "b", "i"),
    "r_up": ("t", "b", "i"), "r_dn": ("t", "b", "i"),
    # Level-2 elastic terms on reserve rows: virtual HVAC kW and ESS kWh
    "slack_th_up": ("t", "b", "i"), "slack_th_dn": ("t", "b", "i"),
    "slack_soc_lo": ("t", "b"), "slack_soc_hi": ("t", "b"),
}
SLACK_ROLES = ("slack_pos", "slack_neg", "slack_th_up", "slack_th_dn",
               "slack_soc_lo", "slack_soc_hi")
RESERVE_ROLES_TB = ("r_ch_up", "r_ch_dn", "r_dis_up", "r_dis_dn", "r_e_up", "r_e_dn")
RESERVE_ROLES_TBI = ("r_h_up", "r_h_dn", "r_up", "r_dn")
BINARY_ROLES = ("z_ch", "z_dis")


class VarKey(NamedTuple):
    role: str
    t: int | None = None
    b: int | None = None
    i: int | None = None
    s: int | None = None

    def label(self) -> str:
        idx = ",".join(str(v) for v in (self.t, self.b, self.i, self.s) if v is not None)
        return f"{self.role}[{idx}]"


class VarMap:
    """Bijective map between :class:`VarKey` tuples and column indices."""

    def __init__(self):
        self._index: dict[VarKey, int] = {}
        self._keys: list[VarKey] = []

    def add(self, key: VarKey) -> int:
        if key.role not in ROLE_DIMS:
            raise InputError(f"unknown role {key.role!r}")
        if key in self._index:
            raise InputError(f"duplicate variable {key.label()}")
        j = len(self._keys)
        self._index[key] = j
        self._keys.append(key)
        return j

    def __getitem__(self, key: VarKey) -> int:
        return self._index[key]

    def get(self, key: VarKey, default=None):
        return self._index.get(key, default)

    def __contains__(self, key) -> bool:
        return key in self._index

    def __len__(self) -> int:
        return len(self._keys)

    def key(self, j: int) -> VarKey:
        return self._keys[j]

    def keys(self) -> list[VarKey]:
        return list(self._keys)

    def roles(self) -> set[str]:
        return {k.role for k in self._keys}

    def columns(self, role: str) -> list[tuple[VarKey, int]]:
        return [(k, j) for j, k in enumerate(self._keys) if k.role == role]
