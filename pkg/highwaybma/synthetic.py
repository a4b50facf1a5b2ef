#!/usr/bin/env python3
# -*- coding: utf-8 -*-

__author__ = "Christian Heider Nielsen"
__doc__ = r"""
Scenes simulated from the car-following and lane-change control laws themselves, with a known lane, leader
and merge duration. Used for self-consistency checks and for the synthetic ingestion path.

           Created on 18/10/2026
           """

__all__ = ["SyntheticScenario", "simulate_scene", "scenarios_from_document"]

import logging
from dataclasses import dataclass, fields
from typing import List, Optional, Sequence

import numpy

from highwaybma.behavior_models import lat_control, lon_control, lon_control_no_lead
from highwaybma.errors import ConfigError
from highwaybma.kinematics import AxisState, step_matrices
from highwaybma.scene import Scene, Track, lanes_from_boundaries

logger = logging.getLogger(__name__)

TARGET_ID = 1
LEADER_ID = 2


@dataclass(frozen=True)
class SyntheticScenario:
    """
    :param lane_count: lanes of width lane_width, lane 0 at the bottom
    :param start_lane: lane the target starts at the center of, at rest laterally
    :param target_lane: lane the target heads for
    :param merge_s: remaining lane-change duration at the first timestep, seconds
    :param lateral_offset: lateral target relative to the target lane's center
    :param leader_gap: initial distance to a leader in the target lane, None for free driving
    :param desired_gap: car-following set-point g*
    :param desired_speed: set-point v*
    :param sigma_lon: longitudinal input noise std
    :param sigma_lat: lateral input noise std
    :param obs_noise_std: position measurement noise std"""

    lane_count: int = 2
    lane_width: float = 4.0
    start_lane: int = 0
    target_lane: int = 0
    merge_s: float = 0.0
    lateral_offset: float = 0.0
    start_speed: float = 25.0
    desired_speed: float = 25.0
    leader_gap: Optional[float] = None
    leader_speed: float = 25.0
    desired_gap: float = 25.0
    sigma_lon: float = 0.05
    sigma_lat: float = 0.05
    obs_noise_std: float = 0.05
    dt: float = 0.1
    obs_s: float = 3.0
    pred_s: float = 5.0
    keep_horizon_steps: int = 100
    follow_horizon_steps: int = 100

    def __post_init__(self):
        if self.lane_count < 1 or not self.lane_width > 0:
            raise ConfigError("Need at least one lane of positive width")
        for name in ("start_lane", "target_lane"):
            if not 0 <= getattr(self, name) < self.lane_count:
                raise ConfigError(f"{name} {getattr(self, name)} outside 0..{self.lane_count - 1}")
        if abs(self.target_lane - self.start_lane) > 1:
            raise ConfigError("The target lane must be the start lane or a neighbour")
        if self.merge_s < 0 or not self.dt > 0:
            raise ConfigError("merge_s cannot be negative and dt must be positive")
        if min(self.sigma_lon, self.sigma_lat, self.obs_noise_std) < 0:
            raise ConfigError("Noise levels cannot be negative")

    @property
    def merge_steps(self) -> int:
        """"""
        return int(round(self.merge_s / self.dt))

    @property
    def window(self):
        """(n, T) in timesteps."""
        n = int(round(self.obs_s / self.dt))
        return n, n + int(round(self.pred_s / self.dt))


def _simulate(scenario: SyntheticScenario, rng: numpy.random.Generator, steps: int):
    mats = step_matrices(scenario.dt)
    lanes = lanes_from_boundaries(numpy.arange(scenario.lane_count + 1) * scenario.lane_width)
    lane_target = lanes[scenario.target_lane].center + scenario.lateral_offset

    lon = AxisState(0.0, scenario.start_speed)
    lat = AxisState(lanes[scenario.start_lane].center, 0.0)
    leader = None
    if scenario.leader_gap is not None:
        leader = AxisState(scenario.leader_gap, scenario.leader_speed)

    target_path = numpy.empty((steps, 2))
    leader_path = numpy.empty((steps, 2))
    for index in range(steps):
        target_path[index] = (lon.position, lat.position)
        if leader is not None:
            leader_path[index] = (leader.position, lanes[scenario.target_lane].center)
        if index == steps - 1:
            break
        if leader is None:
            u1 = lon_control_no_lead(lon.velocity, scenario.desired_speed, scenario.follow_horizon_steps)
        else:
            u1 = lon_control(
                lon, scenario.desired_gap, scenario.desired_speed, leader, scenario.follow_horizon_steps, mats
            )
        u2 = lat_control(lat, lane_target, scenario.merge_steps, index, scenario.keep_horizon_steps, mats)
        u1 += scenario.sigma_lon * rng.standard_normal()
        u2 += scenario.sigma_lat * rng.standard_normal()
        lon = AxisState(lon.position + mats.dt * lon.velocity, max(lon.velocity + u1, 0.0))
        lat = AxisState(lat.position + mats.dt * lat.velocity, lat.velocity + u2)
        if leader is not None:
            leader = AxisState(leader.position + mats.dt * leader.velocity, leader.velocity)

    target_path += scenario.obs_noise_std * rng.standard_normal(target_path.shape)
    if leader is None:
        return lanes, target_path, None
    leader_path += scenario.obs_noise_std * rng.standard_normal(leader_path.shape)
    return lanes, target_path, leader_path


def simulate_scene(
    scenario: SyntheticScenario, rng: numpy.random.Generator, scene_id: str = "synthetic"
) -> Scene:
    """
    One scene: the target observed over 1..n with ground truth through T, and the leader, when present,
    observed over 1..n."""
    n, horizon = scenario.window
    lanes, target_path, leader_path = _simulate(scenario, rng, horizon)
    others = ()
    if leader_path is not None:
        others = (Track(LEADER_ID, leader_path[:n], frozenset(range(1, n + 1))),)
    logger.debug(
        f"Simulated {scene_id}: lane {scenario.start_lane} -> {scenario.target_lane} over "
        f"{scenario.merge_steps} steps, leader {'present' if others else 'absent'}"
    )
    return Scene(
        scene_id=scene_id,
        target=Track(TARGET_ID, target_path, frozenset(range(1, n + 1))),
        others=others,
        lanes=tuple(lanes),
        dt=scenario.dt,
        n=n,
        T=horizon,
    )


def scenarios_from_document(document) -> List[SyntheticScenario]:
    """
    Scenarios from {"scenarios": [{...}, ...]}, a list of dicts or a single dict of SyntheticScenario
    fields."""
    if isinstance(document, dict) and "scenarios" in document:
        document = document["scenarios"]
    if isinstance(document, dict):
        document = [document]
    if not isinstance(document, Sequence):
        raise ConfigError("Synthetic input must hold scenario objects")
    known = {f.name for f in fields(SyntheticScenario)}
    scenarios = []
    for index, entry in enumerate(document):
        if not isinstance(entry, dict):
            raise ConfigError(f"Scenario {index} is not an object")
        unknown = set(entry) - known
        if unknown:
            raise ConfigError(f"Scenario {index}: unknown keys {sorted(unknown)}")
        scenarios.append(SyntheticScenario(**entry))
    return scenarios
