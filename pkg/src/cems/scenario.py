"""PV irradiance scenarios: truncated Gaussian draws around the clear-sky curve.

Relative deviations ``eps_t`` from clear sky are zero-mean Gaussian with
covariance ``std_i * std_j * exp(-|i - j| * dt / corr_length)``.  The kernel is
Markov, so conditioning on everything observed so far reduces to conditioning
on the last observed deviation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .domain import ExogenousData
from .errors import InputError

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class CovModel:
    marginal_std: float | tuple[float, ...] = 0.15
    corr_length_hours: float = 2.0
    seed: int = 0
    step_hours: float = 1.0

    def __post_init__(self):
        std = np.atleast_1d(np.asarray(self.marginal_std, dtype=float))
        if np.any(std < 0):
            raise InputError("marginal_std must be >= 0")
        if self.corr_length_hours <= 0:
            raise InputError("corr_length_hours must be > 0")

    def std(self, T: int) -> np.ndarray:
        std = np.asarray(self.marginal_std, dtype=float)
        if std.ndim == 0:
            return np.full(T, float(std))
        if std.shape != (T,):
            raise InputError(f"marginal_std has {std.size} entries, expected {T}")
        return std

    def correlation(self, lag_steps) -> np.ndarray:
        lag = np.abs(np.asarray(lag_steps, dtype=float)) * self.step_hours
        return np.exp(-lag / self.corr_length_hours)


@dataclass(frozen=True)
class ScenarioSet:
    scenarios: np.ndarray                  # (S, T) irradiance, W/m^2
    weights: np.ndarray                    # (S,)
    anchor_step: int = 0
    clear_sky: np.ndarray | None = None
    mean_deviation: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        g = np.array(self.scenarios, dtype=float)
        if g.ndim != 2 or g.shape[0] < 1:
            raise InputError("scenario matrix must be S x T with S >= 1")
        w = np.array(self.weights, dtype=float)
        if w.shape != (g.shape[0],):
            raise InputError("one weight per scenario required")
        if np.any(w < 0) or abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise InputError(f"weights must be >= 0 and sum to 1 (sum={w.sum()!r})")
        g.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "scenarios", g)
        object.__setattr__(self, "weights", w)
        if self.clear_sky is not None:
            cs = np.array(self.clear_sky, dtype=float)
            cs.setflags(write=False)
            object.__setattr__(self, "clear_sky", cs)

    @property
    def count(self) -> int:
        return self.scenarios.shape[0]

    @property
    def horizon(self) -> int:
        return self.scenarios.shape[1]

    def weighted_mean(self) -> np.ndarray:
        return self.weights @ self.scenarios


def _rng(seed: int, k: int) -> np.random.Generator:
    # step 0 shares the day-ahead stream so an unconditioned update reproduces it
    return np.random.default_rng(seed if k == 0 else [seed, k])


def conditional_mean_deviation(cov: CovModel, T: int, k: int, last_deviation: float) -> np.ndarray:
    """Expected relative deviation for steps ``k..T-1`` given the deviation at ``k-1``."""
    std = cov.std(T)
    f = np.arange(k, T)
    if k == 0 or std[k - 1] == 0:
        return np.zeros(len(f))
    u = last_deviation / std[k - 1]
    return std[f] * u * cov.correlation(f - (k - 1))


def _draw(clear: np.ndarray, cov: CovModel, S: int, k: int, last_dev: float,
          rng: np.random.Generator):
    T = len(clear)
    f = np.arange(k, T)
    std = cov.std(T)
    lag = f[:, None] - f[None, :]
    C = cov.correlation(lag)
    if k > 0:
        rho = cov.correlation(f - (k - 1))
        C = C - np.outer(rho, rho)
    L = np.linalg.cholesky(C + 1e-12 * np.eye(len(f))) if len(f) else np.zeros((0, 0))
    mean_dev = conditional_mean_deviation(cov, T, k, last_dev)
    z = rng.standard_normal((S, len(f)))
    eps = mean_dev + std[f] * (z @ L.T)
    g = np.clip(clear[f] * (1.0 + eps), 0.0, clear[f])
    return g, mean_dev


def generate_day_ahead(exo: ExogenousData, cov: CovModel, S: int) -> ScenarioSet:
    """``S`` equally weighted irradiance trajectories for the whole day."""
    if S < 1:
        raise InputError("need at least one scenario")
    clear = np.asarray(exo.clear_sky_irr, dtype=float)
    g, mean_dev = _draw(clear, cov, S, 0, 0.0, _rng(cov.seed, 0))
    return ScenarioSet(g, np.full(S, 1.0 / S), 0, clear, mean_dev)


def update_hourly(sset: ScenarioSet, cov: CovModel, k: int, observed) -> ScenarioSet:
    """Replace history before ``k`` with observations and redraw the future.

    The redraw is conditioned on the last observed relative deviation, so the
    conditional mean decays as ``exp(-dt / corr_length)`` away from it.
    Weights are reset to uniform.
    """
    T = sset.horizon
    if not 0 <= k <= T:
        raise InputError(f"update step {k} outside [0, {T}]")
    clear = sset.clear_sky
    if clear is None:
        raise InputError("scenario set carries no clear-sky profile")
    obs = np.asarray(observed, dtype=float)[:k]
    if len(obs) < k:
        raise InputError(f"need {k} observations, got {len(obs)}")
    if np.any(obs < -1e-9) or np.any(obs > clear[:k] + 1e-9):
        raise InputError("observations must lie within [0, clear-sky]")
    last_dev = 0.0
    if k > 0 and clear[k - 1] > 0:
        last_dev = obs[k - 1] / clear[k - 1] - 1.0
    S = sset.count
    fut, mean_dev = _draw(clear, cov, S, k, last_dev, _rng(cov.seed, k))
    g = np.empty((S, T))
    g[:, :k] = obs
    g[:, k:] = fut
    return ScenarioSet(g, np.full(S, 1.0 / S), k, clear, mean_dev)


def most_probable(sset: ScenarioSet) -> np.ndarray:
    """Highest-weight scenario; ties go to the one nearest the weighted mean, then lowest index."""
    w = sset.weights
    top = np.flatnonzero(w >= w.max() - WEIGHT_TOL)
    if len(top) > 1:
        dist = np.linalg.norm(sset.scenarios[top] - sset.weighted_mean(), axis=1)
        top = top[dist <= dist.min() + 1e-9]
    return sset.scenarios[int(top[0])].copy()


def draw_truth(exo: ExogenousData, cov: CovModel) -> np.ndarray:
    """One realisation, independent of the forecast scenarios, used as plant PV."""
    clear = np.asarray(exo.clear_sky_irr, dtype=float)
    g, _ = _draw(clear, cov, 1, 0, 0.0, np.random.default_rng([cov.seed, 10_007]))
    return g[0]


def write_scenarios_csv(sset: ScenarioSet, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "s", "irradiance_wm2"])
        for s in range(sset.count):
            for t in range(sset.horizon):
                w.writerow([t, s, repr(float(sset.scenarios[s, t]))])
    return path


def read_scenarios_csv(path: str | Path, clear_sky=None) -> ScenarioSet:
    path = Path(path)
    rows = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["t", "s", "irradiance_wm2"]:
            raise InputError(f"{path}: expected header t,s,irradiance_wm2, got {header}")
        for lineno, rec in enumerate(reader, 2):
            try:
                rows.append((int(rec[0]), int(rec[1]), float(rec[2])))
            except (ValueError, IndexError) as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise InputError(f"{path}: no scenario rows")
    T = max(r[0] for r in rows) + 1
    S = max(r[1] for r in rows) + 1
    g = np.full((S, T), np.nan)
    for t, s, v in rows:
        g[s, t] = v
    if np.isnan(g).any():
        raise InputError(f"{path}: incomplete scenario matrix")
    return ScenarioSet(g, np.full(S, 1.0 / S), 0, clear_sky)
