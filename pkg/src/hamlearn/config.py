"""Experiment configuration: named profiles overlaid with a TOML file."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .network import TrainConfig
from .systems import SystemKind

PROFILES = ("paper", "desk")


@dataclass
class DataConfig:
    train_params: list[list[float]] = field(default_factory=lambda: [[0.2], [0.4], [0.6], [0.8]])
    n_energies: int = 7
    orbits_per_energy: int = 1
    t_end: float = 1000.0
    dt_sample: float = 0.1
    dt_internal: float = 0.01
    energy_cap: float | None = None
    targets: str = "finite_difference"


@dataclass
class AnalyzeConfig:
    alphas: list[Any] = field(default_factory=lambda: [round(0.1 * i, 10) for i in range(11)])
    grid_alphas: list[Any] = field(default_factory=lambda: [0.7, 1.0])
    grid_resolution: int = 101
    taylor_samples: int = 2000
    orbit_alpha: Any = 0.7
    orbit_state: list[float] = field(default_factory=lambda: [0.0, 0.0, 6 ** -0.5, 6 ** -0.5])
    orbit_t_end: float = 200.0
    poincare_alpha: Any = 0.7
    poincare_orbits: int = 10
    poincare_t_end: float = 1000.0
    energy: float = 1.0 / 6.0


@dataclass
class SweepConfig:
    n_alpha: int = 100
    alpha_min: float = 0.0
    alpha_max: float = 1.0
    n_ic: int = 200
    energy: float = 1.0 / 6.0
    dt: float = 0.01
    t_end: float = 1000.0
    learned_n_alpha: int = 100
    learned_n_ic: int = 200
    learned_t_end: float = 1000.0
    transition_fraction: float = 0.05
    low_confidence_invalid_fraction: float = 0.1
    max_norm: float = 10.0


@dataclass
class ExperimentConfig:
    system: SystemKind = SystemKind.HENON_HEILES
    profile: str = "paper"
    seed: int = 0
    out: str = "runs/experiment"
    ensemble_size: int = 20
    data: DataConfig = field(default_factory=DataConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    analyze: AnalyzeConfig = field(default_factory=AnalyzeConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["system"] = SystemKind(self.system).value
        return d


def profile_config(profile: str = "paper", system: SystemKind | str = SystemKind.HENON_HEILES) -> ExperimentConfig:
    """Defaults for a named profile; ``paper`` follows the published settings."""
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}; choose from {PROFILES}")
    kind = SystemKind(system)
    cfg = ExperimentConfig(system=kind, profile=profile)
    if kind is SystemKind.MORSE:
        cfg.data.train_params = [[0.5], [1.0], [2.0], [4.0]]
        cfg.data.n_energies = 5
        cfg.data.t_end = 100.0
        cfg.analyze.alphas = [0.5, 1.0, 1.5, 2.0, 4.0]
        cfg.analyze.grid_alphas = [1.0, 1.5, 2.0]
        cfg.analyze.orbit_alpha = 1.5
        cfg.analyze.orbit_state = [1.0, 1.0]
        cfg.analyze.orbit_t_end = 100.0
    elif kind is SystemKind.ASYMMETRIC_HH:
        grid = [0.2, 0.4, 0.6, 0.8]
        cfg.data.train_params = [[a, b] for a in grid for b in grid]
        cfg.data.n_energies = 5
        axis = [round(0.1 * i, 10) for i in range(11)]
        cfg.analyze.alphas = [[a, b] for a in axis for b in axis]
        cfg.analyze.grid_alphas = [[0.5, 0.5], [0.2, 0.8]]
        cfg.analyze.orbit_alpha = [0.5, 0.5]
        cfg.analyze.poincare_alpha = [0.5, 0.5]
    if profile == "desk":
        cfg.ensemble_size = 5
        cfg.train.epochs = 100
        if kind is not SystemKind.MORSE:
            cfg.data.n_energies = 3
            cfg.data.t_end = 200.0
        cfg.sweep.n_alpha = 21
        cfg.sweep.n_ic = 50
        cfg.sweep.learned_n_alpha = 11
        cfg.sweep.learned_n_ic = 10
        cfg.sweep.learned_t_end = 500.0
        cfg.analyze.poincare_orbits = 5
        cfg.analyze.poincare_t_end = 500.0
    return cfg


def _overlay(obj, values: dict, where: str):
    names = {f.name for f in dataclasses.fields(obj)}
    for key, value in values.items():
        if key not in names:
            raise ValueError(f"unknown config key {where}{key}")
        current = getattr(obj, key)
        if dataclasses.is_dataclass(current):
            if not isinstance(value, dict):
                raise ValueError(f"{where}{key} must be a table")
            _overlay(current, value, f"{where}{key}.")
        else:
            setattr(obj, key, value)


def load_config(path: str | Path | None = None, profile: str | None = None,
                seed: int | None = None, out: str | None = None) -> ExperimentConfig:
    """Profile defaults, then the TOML file, then explicit overrides."""
    raw: dict = {}
    if path is not None:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    chosen = profile or raw.get("profile", "paper")
    cfg = profile_config(chosen, raw.get("system", SystemKind.HENON_HEILES))
    raw = {k: v for k, v in raw.items() if k not in ("profile", "system")}
    _overlay(cfg, raw, "")
    cfg.profile = chosen
    cfg.system = SystemKind(cfg.system)
    cfg.data.train_params = [list(map(float, p)) if isinstance(p, (list, tuple)) else [float(p)]
                             for p in cfg.data.train_params]
    if seed is not None:
        cfg.seed = int(seed)
    if out is not None:
        cfg.out = str(out)
    cfg.train = TrainConfig(**dataclasses.asdict(cfg.train))
    return cfg
