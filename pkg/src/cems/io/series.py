"""Plain CSV time series: ``t,value`` and ``t,b,value`` layouts."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from ..errors import InputError


def _open(path: Path):
    try:
        return path.open(newline="")
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror or exc})") from exc


def _rows(path: Path, header: list[str]):
    with _open(path) as fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None:
            raise InputError(f"{path}:1: empty file, expected header {','.join(header)}")
        if [c.strip() for c in first] != header:
            raise InputError(f"{path}:1: expected header {','.join(header)}, "
                             f"got {','.join(first)}")
        for lineno, rec in enumerate(reader, 2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise InputError(f"{path}:{lineno}: expected {len(header)} fields, "
                                 f"got {len(rec)}")
            yield lineno, [c.strip() for c in rec]


def _float(path, lineno, text):
    try:
        return float(text)
    except ValueError:
        raise InputError(f"{path}:{lineno}: not a number: {text!r}") from None


def _index(path, lineno, text):
    try:
        v = int(text)
    except ValueError:
        raise InputError(f"{path}:{lineno}: not an integer index: {text!r}") from None
    if v < 0:
        raise InputError(f"{path}:{lineno}: negative index {v}")
    return v


def _dense(path: Path, values: dict, length: int) -> np.ndarray:
    n = max(values) + 1 if values else 0
    if length is not None:
        if n > length:
            raise InputError(f"{path}: index {n - 1} beyond expected length {length}")
        n = length
    out = np.full(n, np.nan)
    for t, v in values.items():
        out[t] = v
    missing = np.flatnonzero(np.isnan(out))
    if missing.size:
        raise InputError(f"{path}: missing values for t in {missing[:5].tolist()}")
    return out


def read_series(path, length: int | None = None) -> np.ndarray:
    """Read a ``t,value`` file into a dense array indexed by ``t``."""
    path = Path(path)
    values: dict[int, float] = {}
    for lineno, (t, v) in _rows(path, ["t", "value"]):
        ti = _index(path, lineno, t)
        if ti in values:
            raise InputError(f"{path}:{lineno}: duplicate t={ti}")
        values[ti] = _float(path, lineno, v)
    return _dense(path, values, length)


def read_building_series(path, building_ids, length: int | None = None) -> dict[str, np.ndarray]:
    """Read a ``t,b,value`` file; ``b`` may be a building id or a 0-based index."""
    path = Path(path)
    ids = list(building_ids)
    values: dict[str, dict[int, float]] = {b: {} for b in ids}
    for lineno, (t, b, v) in _rows(path, ["t", "b", "value"]):
        ti = _index(path, lineno, t)
        if b in values:
            key = b
        else:
            bi = _index(path, lineno, b)
            if bi >= len(ids):
                raise InputError(f"{path}:{lineno}: unknown building {b!r}")
            key = ids[bi]
        if ti in values[key]:
            raise InputError(f"{path}:{lineno}: duplicate (t={ti}, b={key})")
        values[key][ti] = _float(path, lineno, v)
    return {b: _dense(path, vals, length) for b, vals in values.items() if vals}


def write_series(path, values) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write("t,value\n")
        for t, v in enumerate(np.asarray(values, dtype=float)):
            fh.write(f"{t},{float(v)!r}\n")
    return path


def write_building_series(path, series: dict[str, np.ndarray]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write("t,b,value\n")
        for b, arr in series.items():
            for t, v in enumerate(np.asarray(arr, dtype=float)):
                fh.write(f"{t},{b},{float(v)!r}\n")
    return path
