"""Outer linearisation of the quadratic discomfort curve by tangent cuts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..domain import HvacZoneParams
from ..errors import InputError

DEFAULT_CUTS = 16


@dataclass(frozen=True)
class ComfortCuts:
    coeffs: tuple[float, float, float]
    touch_points: tuple[float, ...]
    slopes: tuple[float, ...]
    intercepts: tuple[float, ...]

    @property
    def num_cuts(self) -> int:
        return len(self.slopes)

    def envelope(self, t_in):
        """Max over the tangents, the value the optimiser sees for sigma."""
        t = np.asarray(t_in, dtype=float)
        vals = np.multiply.outer(t, self.slopes) + np.asarray(self.intercepts)
        out = vals.max(axis=-1)
        return float(out) if out.ndim == 0 else out

    def gap_bound(self) -> float:
        """Worst gap between quadratic and envelope: a * (spacing / 2)^2."""
        if len(self.touch_points) < 2:
            return np.inf
        h = self.touch_points[1] - self.touch_points[0]
        return self.coeffs[0] * (h / 2.0) ** 2


def tangent_cuts(coeffs, lo: float, hi: float, K: int) -> ComfortCuts:
    if K < 2:
        raise InputError(f"need at least 2 comfort cuts, got {K}")
    a, b, c = coeffs
    pts = np.linspace(lo, hi, K)
    slopes = 2.0 * a * pts + b
    intercepts = c - a * pts * pts
    return ComfortCuts(tuple(float(v) for v in coeffs), tuple(pts.tolist()),
                       tuple(slopes.tolist()), tuple(intercepts.tolist()))


def add_comfort_cuts(zone: HvacZoneParams, K: int = DEFAULT_CUTS) -> ComfortCuts:
    """Tangents at ``K`` equally spaced temperatures over the zone's comfort band."""
    return tangent_cuts(zone.comfort_coeffs, zone.temp_min_c, zone.temp_max_c, K)
