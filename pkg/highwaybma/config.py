#!/usr/bin/env python3
# -*- coding: utf-8 -*-

__author__ = "Christian Heider Nielsen"
__doc__ = r"""
Run configuration: every model, sensing, windowing and evaluation parameter, with the defaults used for
highway experiments at 10 Hz.

           Created on 18/10/2026
           """

__all__ = ["RunConfig", "CONFIG_ENV_VAR", "VIEWS", "DATASETS", "resolve_config_path", "load_config"]

import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy

from highwaybma.errors import ConfigError
from highwaybma.sensing import SensorConfig

CONFIG_ENV_VAR = "HIGHWAYBMA_CONFIG"
CONFIG_FILE_NAME = "config.json"
VIEWS = ("bird", "driver")
DATASETS = ("ngsim", "highd", "synthetic")
NGSIM_SIGMA_LON = 0.2


def _steps(seconds: float, dt: float) -> int:
    return int(round(seconds / dt))


@dataclass(frozen=True)
class RunConfig:
    """
    :param dt: model timestep, seconds
    :param merge_max_s: longest remaining lane-change duration considered, seconds
    :param merge_step_s: spacing of the merge-duration grid, seconds
    :param keep_horizon_steps: lane-keep horizon k_s, steps
    :param follow_horizon_steps: car-following horizon k_c (and free-driving k_f), steps
    :param sigma_lon: longitudinal input noise; None resolves per dataset (0.2 for NGSIM, sigma_lat otherwise)
    :param n_samples: sampled trajectories per component
    :param view: "bird" for full observations, "driver" for range- and occlusion-limited ones
    :param no_interaction: ignore surrounding vehicles altogether
    :param rollout_noise: add input noise when propagating samples
    :param clamp_leader: keep predicted leader speeds non-negative as well"""

    dt: float = 0.1
    merge_max_s: float = 12.0
    merge_step_s: float = 0.5
    keep_horizon_steps: int = 100
    follow_horizon_steps: int = 100
    sigma_p: float = 1.5
    sigma_g: float = 2.0
    sigma_v: float = 2.0
    sigma_lat: float = 0.05
    sigma_lon: Optional[float] = None
    tau_f: float = 50.0
    tau_r: float = 10.0
    qde_quantile: float = 0.2
    n_samples: int = 4
    seed: int = 0
    view: str = "bird"
    no_interaction: bool = False
    obs_noise_std: float = 0.05
    init_position_std: float = 0.05
    init_velocity_std: float = 2.0
    rollout_noise: bool = True
    clamp_leader: bool = False
    obs_s: float = 3.0
    pred_s: float = 5.0
    stride_s: float = 5.0
    workers: int = 1
    dataset: str = "synthetic"
    sensor: SensorConfig = field(default_factory=SensorConfig)

    def __post_init__(self):
        positive = (
            "dt",
            "merge_step_s",
            "sigma_p",
            "sigma_g",
            "sigma_v",
            "sigma_lat",
            "obs_noise_std",
            "init_position_std",
            "init_velocity_std",
            "obs_s",
            "pred_s",
            "stride_s",
        )
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.sigma_lon is not None and not self.sigma_lon > 0:
            raise ConfigError(f"sigma_lon must be positive or null, got {self.sigma_lon}")
        if self.merge_max_s < 0:
            raise ConfigError(f"merge_max_s cannot be negative, got {self.merge_max_s}")
        for name in ("keep_horizon_steps", "follow_horizon_steps"):
            if int(getattr(self, name)) != getattr(self, name) or getattr(self, name) < 2:
                raise ConfigError(f"{name} must be an integer of at least 2, got {getattr(self, name)}")
        if self.tau_f < 0 or self.tau_r < 0:
            raise ConfigError("tau_f and tau_r cannot be negative")
        if not 0 < self.qde_quantile <= 1:
            raise ConfigError(f"qde_quantile must lie in (0, 1], got {self.qde_quantile}")
        if self.n_samples < 1 or self.workers < 1:
            raise ConfigError("n_samples and workers must be at least 1")
        if self.seed < 0:
            raise ConfigError(f"seed cannot be negative, got {self.seed}")
        if self.view not in VIEWS:
            raise ConfigError(f"view must be one of {VIEWS}, got {self.view!r}")
        if self.dataset not in DATASETS:
            raise ConfigError(f"dataset must be one of {DATASETS}, got {self.dataset!r}")
        if not isinstance(self.sensor, SensorConfig):
            raise ConfigError("sensor must be a SensorConfig")

    @property
    def lon_noise(self) -> float:
        """Resolved longitudinal input noise std."""
        if self.sigma_lon is not None:
            return self.sigma_lon
        return NGSIM_SIGMA_LON if self.dataset == "ngsim" else self.sigma_lat

    def merge_grid_seconds(self) -> Tuple[float, ...]:
        """"""
        count = int(round(self.merge_max_s / self.merge_step_s)) + 1
        return tuple(float(s) for s in numpy.arange(count) * self.merge_step_s)

    def merge_grid_steps(self, dt: float = None) -> Tuple[int, ...]:
        """Merge-duration grid in timesteps; 0..12 s at 0.5 s and 10 Hz gives 25 values."""
        dt = self.dt if dt is None else dt
        return tuple(_steps(seconds, dt) for seconds in self.merge_grid_seconds())

    def window_steps(self, dt: float = None) -> Tuple[int, int, int]:
        """(observation length n, final timestep T, stride) in timesteps."""
        dt = self.dt if dt is None else dt
        n = _steps(self.obs_s, dt)
        return n, n + _steps(self.pred_s, dt), _steps(self.stride_s, dt)

    def updated(self, **changes) -> "RunConfig":
        """Copy with the given fields replaced; None values are ignored."""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def to_dict(self) -> dict:
        """"""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        """"""
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"Unknown configuration keys: {sorted(unknown)}")
        data = dict(data)
        sensor = data.pop("sensor", {})
        sensor_known = {f.name for f in fields(SensorConfig)}
        if set(sensor) - sensor_known:
            raise ConfigError(f"Unknown sensor keys: {sorted(set(sensor) - sensor_known)}")
        try:
            return cls(sensor=SensorConfig(**sensor), **data)
        except (TypeError, ValueError) as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(str(e)) from e

    def dumps(self) -> str:
        """"""
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def save(self, path: Union[str, Path]) -> Path:
        """"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dumps())
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "RunConfig":
        """"""
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except OSError as e:
            raise ConfigError(f"Cannot read configuration {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"Configuration {path} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"Configuration {path} must hold a JSON object")
        return cls.from_dict(data)


def resolve_config_path(explicit: Union[str, Path, None] = None) -> Optional[Path]:
    """
    Configuration file to use: the explicit path, else the HIGHWAYBMA_CONFIG environment variable, else
    config.json in the user config directory when it exists, else None (built-in defaults)."""
    if explicit:
        return Path(explicit)
    from_env = os.getenv(CONFIG_ENV_VAR)
    if from_env:
        return Path(from_env)
    from highwaybma import PROJECT_APP_PATH

    candidate = PROJECT_APP_PATH.user_config / CONFIG_FILE_NAME
    return candidate if candidate.is_file() else None


def load_config(explicit: Union[str, Path, None] = None) -> RunConfig:
    """"""
    path = resolve_config_path(explicit)
    if path is None:
        return RunConfig()
    return RunConfig.load(path)
