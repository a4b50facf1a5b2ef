#!/usr/bin/env python3
# -*- coding: utf-8 -*-

__author__ = "Christian Heider Nielsen"
__doc__ = r"""
Driver-view observation degradation (sensor range and line-of-sight occlusion) and constant-velocity
fixed-interval smoothing of surrounding tracks.

           Created on 18/10/2026
           """

__all__ = ["SensorConfig", "SmoothedTrack", "occluded", "driver_view", "smooth_track_cv"]

import logging
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy
from filterpy.kalman import KalmanFilter
from shapely.geometry import LineString, Point

from highwaybma.errors import InputError
from highwaybma.kinematics import AxisState, step_matrices
from highwaybma.scene import Scene, Track

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SensorConfig:
    """
    :param range_lon: two-sided longitudinal sensing range, meters
    :param obstacle_radius: radius of the disc each vehicle occludes, meters
    :param min_obs_s: minimum total observed time for a vehicle to be kept, seconds
    :param smoother_obs_std: position noise assumed when smoothing surrounding tracks, meters
    :param smoother_velocity_std: prior velocity spread at a track's first observation, meters/second"""

    range_lon: float = 50.0
    obstacle_radius: float = 2.0
    min_obs_s: float = 1.0
    smoother_obs_std: float = 0.05
    smoother_velocity_std: float = 10.0

    def __post_init__(self):
        positive = ("range_lon", "obstacle_radius", "min_obs_s", "smoother_obs_std", "smoother_velocity_std")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ValueError(f"Sensor setting {name} must be positive, got {getattr(self, name)}")

    def min_obs_steps(self, dt: float) -> int:
        """Observed timesteps needed to reach min_obs_s; 1 s at 10 Hz is 10 frames."""
        return math.ceil(self.min_obs_s / dt - 1e-9)


@dataclass(frozen=True, eq=False)
class SmoothedTrack:
    """
    Smoothed (position, velocity) per axis at every timestep of the window, row t-1 for timestep t."""

    vehicle_id: int
    lon: numpy.ndarray
    lat: numpy.ndarray

    def lon_state(self, t: int) -> AxisState:
        """"""
        return AxisState.from_array(self.lon[t - 1])

    def lat_state(self, t: int) -> AxisState:
        """"""
        return AxisState.from_array(self.lat[t - 1])

    def __len__(self) -> int:
        return len(self.lon)


def occluded(
    ego: Sequence[float], subject: Sequence[float], obstacles: Sequence[Sequence[float]], radius: float = 2.0
) -> bool:
    """
    True iff the sight line between ego and subject passes strictly within radius of an obstacle center.

    :param ego: (longitudinal, lateral) of the observer
    :param subject: (longitudinal, lateral) of the observed vehicle
    :param obstacles: centers of every other vehicle, endpoints excluded"""
    if tuple(ego) == tuple(subject):
        sight = Point(ego)
    else:
        sight = LineString([tuple(ego), tuple(subject)])
    return any(sight.distance(Point(obstacle)) < radius for obstacle in obstacles)


def driver_view(scene: Scene, ego_id: int, config: SensorConfig = SensorConfig()) -> Scene:
    """
    Degrade the surrounding tracks' masks to what vehicle ego_id would see: only vehicles within the
    longitudinal range and not occluded by any other present vehicle. Vehicles observed for less than
    min_obs_s in total are dropped. The target's own mask is left untouched.

    :param scene: scene with full (bird's-eye) observations
    :param ego_id: observing vehicle, the target or one of the surrounding vehicles
    :param config: sensor model"""
    ego = scene.target if ego_id == scene.target.vehicle_id else scene.other(ego_id)
    window = range(1, scene.n + 1)
    missing = [t for t in window if not ego.observed(t)]
    if missing:
        raise InputError(f"Scene {scene.scene_id}: ego vehicle {ego_id} unobserved at timesteps {missing}")

    everyone = (scene.target,) + scene.others
    masks = {track.vehicle_id: set() for track in scene.others}
    for t in window:
        ego_position = ego.position(t)
        present = [track for track in everyone if track.vehicle_id != ego_id and track.observed(t)]
        for track in present:
            if track.vehicle_id not in masks:
                continue
            subject = track.position(t)
            if abs(subject[0] - ego_position[0]) > config.range_lon:
                continue
            obstacles = [other.position(t) for other in present if other.vehicle_id != track.vehicle_id]
            if not occluded(ego_position, subject, obstacles, config.obstacle_radius):
                masks[track.vehicle_id].add(t)

    min_steps = config.min_obs_steps(scene.dt)
    kept = []
    for track in scene.others:
        if track.vehicle_id == ego_id:
            continue
        mask = masks[track.vehicle_id]
        if len(mask) < min_steps:
            logger.debug(
                f"Scene {scene.scene_id}: dropping vehicle {track.vehicle_id}, "
                f"seen {len(mask)}/{min_steps} steps"
            )
            continue
        kept.append(track.with_mask(mask))
    return replace(scene, others=tuple(kept))


def _smooth_axis(
    observations: numpy.ndarray,
    first: int,
    dt: float,
    obs_std: float,
    process_std: float,
    velocity_std: float,
) -> numpy.ndarray:
    """RTS smoothing of one axis from timestep index `first` on; NaN marks a missing observation."""
    mats = step_matrices(dt)
    kf = KalmanFilter(dim_x=2, dim_z=1)
    kf.F = numpy.array(mats.A)
    kf.H = numpy.array([[1.0, 0.0]])
    kf.Q = mats.B @ mats.B.T * process_std ** 2
    kf.R = numpy.array([[obs_std ** 2]])
    kf.x = numpy.array([[observations[first]], [0.0]])
    kf.P = numpy.diag([obs_std ** 2, velocity_std ** 2])

    means, covariances = [], []
    for index in range(first, len(observations)):
        if index > first:
            kf.predict()
        if numpy.isfinite(observations[index]):
            kf.update(observations[index])
        means.append(kf.x.copy())
        covariances.append(kf.P.copy())
    smoothed, _, _, _ = kf.rts_smoother(numpy.array(means), numpy.array(covariances))
    smoothed = smoothed[:, :, 0]

    states = numpy.empty((len(observations), 2))
    states[first:] = smoothed
    earlier = numpy.arange(first, 0, -1) * dt
    states[:first, 0] = smoothed[0, 0] - earlier * smoothed[0, 1]
    states[:first, 1] = smoothed[0, 1]
    return states


def smooth_track_cv(
    track: Track, dt: float, sigma_obs: float, sigma_process: float = 0.05, velocity_std: float = 10.0
) -> SmoothedTrack:
    """
    Fixed-interval smoothing of both axes under zero-control double-integrator dynamics. Returns states at
    every timestep of the track, including unobserved ones; timesteps before the first observation are
    extrapolated backward at the smoothed velocity.

    :param track: masked track
    :param dt: timestep, seconds
    :param sigma_obs: position observation noise std, meters
    :param sigma_process: per-step velocity noise std of the constant-velocity model
    :param velocity_std: prior velocity std at the first observation"""
    steps = track.observed_steps
    if not steps:
        raise InputError(f"Vehicle {track.vehicle_id}: cannot smooth a track without observations")
    observations = numpy.full((len(track), 2), numpy.nan)
    for t in steps:
        observations[t - 1] = track.position(t)
    first = steps[0] - 1
    lon = _smooth_axis(observations[:, 0], first, dt, sigma_obs, sigma_process, velocity_std)
    lat = _smooth_axis(observations[:, 1], first, dt, sigma_obs, sigma_process, velocity_std)
    return SmoothedTrack(track.vehicle_id, lon, lat)
