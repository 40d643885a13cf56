"""JSON community configuration with inline or CSV-backed series.

A series field holds either a JSON list of numbers or a path (relative to the
config file) to a ``t,value`` CSV.  Per-building demand series may instead
come from a shared ``t,b,value`` file named under ``building_series``.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from ..domain import (BuildingConfig, CommunityConfig, EssParams, ExogenousData,
                      HvacZoneParams, PriceSchedule, PvParams, ScenarioSettings,
                      TimeGrid)
from ..errors import InputError
from .series import (read_building_series, read_series, write_building_series,
                     write_series)

_BUILDING_SERIES = ("demand_load", "demand_ev")


class _Reader:
    def __init__(self, path: Path):
        self.path = path
        self.base = path.parent

    def fail(self, where: str, msg: str):
        raise InputError(f"{self.path}: {where}: {msg}")

    def section(self, data, where: str, cls, skip=()):
        if not isinstance(data, dict):
            self.fail(where, "expected an object")
        names = {f.name for f in dataclasses.fields(cls)} - set(skip)
        unknown = sorted(set(data) - names - set(skip))
        if unknown:
            self.fail(where, f"unknown keys {unknown}")
        kwargs = {k: v for k, v in data.items() if k in names}
        for k, v in kwargs.items():
            if isinstance(v, list) and k != "comfort_coeffs":
                self.fail(f"{where}.{k}", "expected a scalar")
        try:
            return cls(**kwargs)
        except TypeError as exc:
            self.fail(where, str(exc))

    def series(self, value, where: str, length: int | None):
        if isinstance(value, str):
            return read_series(self.base / value, length)
        if isinstance(value, list):
            try:
                arr = np.array(value, dtype=float)
            except (TypeError, ValueError):
                self.fail(where, "series must contain numbers")
            if arr.ndim != 1:
                self.fail(where, "series must be a flat list")
            return arr
        self.fail(where, "series must be a list or a CSV path")


def load_config(path) -> CommunityConfig:
    """Parse a JSON config; errors name the file and, for JSON syntax, the line."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror or exc})") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from exc
    rd = _Reader(path)
    if not isinstance(data, dict):
        rd.fail("top level", "expected an object")
    allowed = {"name", "time", "buildings", "prices", "exogenous", "scenarios",
               "building_series"}
    unknown = sorted(set(data) - allowed)
    if unknown:
        rd.fail("top level", f"unknown keys {unknown}")
    for key in ("buildings", "prices", "exogenous"):
        if key not in data:
            rd.fail("top level", f"missing {key!r}")

    time = rd.section(data.get("time", {}), "time", TimeGrid)
    T = time.horizon_steps

    raw_b = data["buildings"]
    if not isinstance(raw_b, list):
        rd.fail("buildings", "expected a list")
    ids = [b.get("id") if isinstance(b, dict) else None for b in raw_b]
    shared: dict[str, dict[str, np.ndarray]] = {}
    for field, file in (data.get("building_series") or {}).items():
        if field not in _BUILDING_SERIES:
            rd.fail("building_series", f"unknown series {field!r}")
        shared[field] = read_building_series(rd.base / file, ids, T)

    buildings = []
    for bi, b in enumerate(raw_b):
        where = f"buildings[{bi}]"
        if not isinstance(b, dict):
            rd.fail(where, "expected an object")
        unknown = sorted(set(b) - {"id", "kind", "zones", "ess", "pv", *_BUILDING_SERIES})
        if unknown:
            rd.fail(where, f"unknown keys {unknown}")
        for key in ("id", "kind", "zones", "ess", "pv"):
            if key not in b:
                rd.fail(where, f"missing {key!r}")
        zones = b["zones"]
        if not isinstance(zones, list):
            rd.fail(f"{where}.zones", "expected a list")
        zones = tuple(rd.section(z, f"{where}.zones[{zi}]", HvacZoneParams)
                      for zi, z in enumerate(zones))
        series = {}
        for name in _BUILDING_SERIES:
            if name in b:
                series[name] = rd.series(b[name], f"{where}.{name}", T)
            elif b["id"] in shared.get(name, {}):
                series[name] = shared[name][b["id"]]
            elif name == "demand_ev":
                series[name] = np.zeros(T)
            else:
                rd.fail(where, f"missing {name!r}")
        buildings.append(BuildingConfig(
            id=str(b["id"]), kind=str(b["kind"]), zones=zones,
            ess=rd.section(b["ess"], f"{where}.ess", EssParams),
            pv=rd.section(b["pv"], f"{where}.pv", PvParams), **series))

    pr = data["prices"]
    if not isinstance(pr, dict):
        rd.fail("prices", "expected an object")
    unknown = sorted(set(pr) - {f.name for f in dataclasses.fields(PriceSchedule)})
    if unknown:
        rd.fail("prices", f"unknown keys {unknown}")
    for key in ("lambda_import", "lambda_export"):
        if key not in pr:
            rd.fail("prices", f"missing {key!r}")
    prices = PriceSchedule(
        lambda_import=rd.series(pr["lambda_import"], "prices.lambda_import", T),
        lambda_export=rd.series(pr["lambda_export"], "prices.lambda_export", T),
        lambda_comfort=float(pr.get("lambda_comfort", 0.0)),
        lambda_ffr=float(pr.get("lambda_ffr", 0.0)))

    ex = data["exogenous"]
    if not isinstance(ex, dict):
        rd.fail("exogenous", "expected an object")
    unknown = sorted(set(ex) - {f.name for f in dataclasses.fields(ExogenousData)})
    if unknown:
        rd.fail("exogenous", f"unknown keys {unknown}")
    for key in ("t_out", "clear_sky_irr", "reg_signal"):
        if key not in ex:
            rd.fail("exogenous", f"missing {key!r}")
    exo = ExogenousData(
        t_out=rd.series(ex["t_out"], "exogenous.t_out", T),
        clear_sky_irr=rd.series(ex["clear_sky_irr"], "exogenous.clear_sky_irr", T),
        reg_signal=rd.series(ex["reg_signal"], "exogenous.reg_signal", time.rt_length),
        truth_irr=(rd.series(ex["truth_irr"], "exogenous.truth_irr", T)
                   if ex.get("truth_irr") is not None else None))
    scen = rd.section(data.get("scenarios", {}), "scenarios", ScenarioSettings)
    return CommunityConfig(time=time, buildings=tuple(buildings), prices=prices,
                           exogenous=exo, scenarios=scen,
                           name=str(data.get("name", path.stem)))


def _plain(obj) -> dict:
    out = {}
    for f in dataclasses.fields(obj):
        v = getattr(obj, f.name)
        out[f.name] = list(v) if isinstance(v, tuple) else v
    return out


def config_to_dict(cfg: CommunityConfig, series_files: dict[str, str] | None = None) -> dict:
    """JSON-ready dict; ``series_files`` maps series keys to CSV names to reference."""
    files = series_files or {}

    def ser(key, arr):
        return files.get(key, [float(v) for v in arr])

    buildings = []
    for b in cfg.buildings:
        entry = {"id": b.id, "kind": b.kind,
                 "zones": [_plain(z) for z in b.zones],
                 "ess": _plain(b.ess), "pv": _plain(b.pv)}
        for name in _BUILDING_SERIES:
            if "building_series" not in files:
                entry[name] = [float(v) for v in getattr(b, name)]
        buildings.append(entry)
    ex = cfg.exogenous
    out = {
        "name": cfg.name,
        "time": _plain(cfg.time),
        "scenarios": _plain(cfg.scenarios),
        "prices": {"lambda_import": ser("lambda_import", cfg.prices.lambda_import),
                   "lambda_export": ser("lambda_export", cfg.prices.lambda_export),
                   "lambda_comfort": cfg.prices.lambda_comfort,
                   "lambda_ffr": cfg.prices.lambda_ffr},
        "exogenous": {"t_out": ser("t_out", ex.t_out),
                      "clear_sky_irr": ser("clear_sky_irr", ex.clear_sky_irr),
                      "reg_signal": ser("reg_signal", ex.reg_signal)},
        "buildings": buildings,
    }
    if ex.truth_irr is not None:
        out["exogenous"]["truth_irr"] = ser("truth_irr", ex.truth_irr)
    if "building_series" in files:
        out["building_series"] = {n: f"{n}.csv" for n in _BUILDING_SERIES}
    return out


def export_config(cfg: CommunityConfig, out_dir) -> Path:
    """Write ``config.json`` plus one CSV per series into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {}
    ex = cfg.exogenous
    for key, arr in (("lambda_import", cfg.prices.lambda_import),
                     ("lambda_export", cfg.prices.lambda_export),
                     ("t_out", ex.t_out), ("clear_sky_irr", ex.clear_sky_irr),
                     ("reg_signal", ex.reg_signal), ("truth_irr", ex.truth_irr)):
        if arr is not None:
            write_series(out_dir / f"{key}.csv", arr)
            files[key] = f"{key}.csv"
    for name in _BUILDING_SERIES:
        write_building_series(out_dir / f"{name}.csv",
                              {b.id: getattr(b, name) for b in cfg.buildings})
    files["building_series"] = "yes"
    path = out_dir / "config.json"
    path.write_text(json.dumps(config_to_dict(cfg, files), indent=2) + "\n")
    return path
