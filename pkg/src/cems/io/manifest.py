"""Run manifest: everything needed to repeat a ``level1`` or ``simulate`` run."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from ..control import SolverOptions
from ..datasets import DATASETS, load_dataset
from ..domain import CommunityConfig, require_valid
from ..errors import InputError
from .config import load_config

MANIFEST_NAME = "manifest.json"
COMMANDS = ("level1", "simulate")
MODES = ("cems", "bems")


@dataclass(frozen=True)
class RunManifest:
    command: str
    out: str
    mode: str = "cems"
    seed: int = 0
    config: str | None = None         # path to a JSON config; overrides ``dataset``
    dataset: str = "bundled"
    scenarios: int | None = None
    smpc_horizon: int | None = None
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"manifest command must be one of {COMMANDS}")
        if self.mode not in MODES:
            raise InputError(f"mode must be one of {MODES}, got {self.mode!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise InputError("seed must be a non-negative integer")
        if self.config is None and self.dataset not in DATASETS:
            raise InputError(f"unknown dataset {self.dataset!r}; choose from {sorted(DATASETS)}")
        for name in ("scenarios", "smpc_horizon"):
            v = getattr(self, name)
            if v is not None and (isinstance(v, bool) or not isinstance(v, int) or v < 1):
                raise InputError(f"{name} must be a positive integer")
        SolverOptions.from_overrides(self.tolerances)
        object.__setattr__(self, "tolerances", dict(sorted(self.tolerances.items())))

    def load_config(self) -> CommunityConfig:
        cfg = load_config(self.config) if self.config else load_dataset(self.dataset)
        if self.scenarios is not None:
            cfg = replace(cfg, scenarios=replace(cfg.scenarios, count=self.scenarios))
        if self.smpc_horizon is not None:
            cfg = replace(cfg, time=replace(cfg.time, smpc_horizon_N=self.smpc_horizon))
        require_valid(cfg)
        return cfg

    @property
    def solver(self) -> SolverOptions:
        return SolverOptions.from_overrides(self.tolerances)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    def save(self, out_dir) -> Path:
        path = Path(out_dir) / MANIFEST_NAME
        path.write_text(self.to_json())
        return path

    @classmethod
    def load(cls, path) -> "RunManifest":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            raise InputError(f"{path}: cannot read ({exc.strerror or exc})") from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from exc
        if not isinstance(data, dict):
            raise InputError(f"{path}: manifest must be a JSON object")
        names = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - names)
        if unknown:
            raise InputError(f"{path}: unknown manifest keys {unknown}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise InputError(f"{path}: {exc}") from None


def prepare_out_dir(out, force: bool) -> Path:
    """Create ``out``; an existing non-empty directory needs ``force``."""
    path = Path(out)
    if path.exists() and not path.is_dir():
        raise InputError(f"{path}: output path exists and is not a directory")
    if path.is_dir() and any(path.iterdir()) and not force:
        raise InputError(f"{path}: output directory is not empty (use --force)")
    path.mkdir(parents=True, exist_ok=True)
    return path
