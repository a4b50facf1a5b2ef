#!/usr/bin/env python3
# -*- coding: utf-8 -*-

__author__ = "Christian Heider Nielsen"
__doc__ = r"""
Longitudinal car-following and lateral lane-change control laws, their Gaussian parameter priors and the
augmented time-varying linear-Gaussian systems used for filtering.

Both control laws are the first input of a minimum-norm plan, so with the horizon fixed they are linear in
the kinematic state and in the unknown set-points (desired gap g*, desired speed v*, lateral target p_m).
Appending the set-points to the state as constants turns every component into a linear-Gaussian system.

           Created on 18/10/2026
           """

__all__ = [
    "LongitudinalModel",
    "LateralModel",
    "AugmentedSystem",
    "ParameterPriors",
    "LON_LABELS",
    "LAT_LABELS",
    "lon_control",
    "lon_control_no_lead",
    "lat_horizon",
    "lat_gains",
    "lat_control",
    "priors_from_observations",
    "build_lon_system",
    "build_lat_system",
]

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy

from highwaybma.errors import InputError
from highwaybma.gaussian import GaussianBelief
from highwaybma.kinematics import AxisState, StepMatrices, first_input_gains
from highwaybma.scene import Scene
from highwaybma.sensing import SmoothedTrack

LON_LABELS = ("p1", "v1", "g_star", "v_star")
LAT_LABELS = ("p2", "v2", "p_m")
STOP_GAINS = numpy.array([0.0, -1.0])
STOP_GAINS.setflags(write=False)


@dataclass(frozen=True)
class LongitudinalModel:
    """
    :param leader: followed vehicle id, None for free driving
    :param horizon_kc: planning horizon of the car-following controller, steps (also k_f of free driving)
    :param sigma_g: prior std of the desired gap, meters
    :param sigma_v: prior std of the desired speed, meters/second
    :param sigma_lon: std of the longitudinal input noise"""

    leader: Optional[int]
    horizon_kc: int = 100
    sigma_g: float = 2.0
    sigma_v: float = 2.0
    sigma_lon: float = 0.05

    def __post_init__(self):
        if self.horizon_kc < 2:
            raise ValueError(f"Car-following horizon must be at least 2 steps, got {self.horizon_kc}")
        for name in ("sigma_g", "sigma_v", "sigma_lon"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class LateralModel:
    """
    :param lane_center: center of the lane the driver heads for, meters
    :param merge_steps: lane-change steps remaining at the first timestep
    :param keep_horizon_ks: planning horizon once the lane change is over, steps
    :param sigma_p: prior std of the lateral target around the lane center, meters
    :param sigma_lat: std of the lateral input noise"""

    lane_center: float
    merge_steps: int
    keep_horizon_ks: int = 100
    sigma_p: float = 1.5
    sigma_lat: float = 0.05

    def __post_init__(self):
        if self.merge_steps < 0:
            raise ValueError(f"Merge duration cannot be negative, got {self.merge_steps}")
        if self.keep_horizon_ks < 2:
            raise ValueError(f"Lane-keep horizon must be at least 2 steps, got {self.keep_horizon_ks}")
        for name in ("sigma_p", "sigma_lat"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True, eq=False)
class AugmentedSystem:
    """
    z(t+1) = F_t z(t) + c_t + w_t, w_t ~ N(0, Q), observed through y(t) = H z(t) + v_t, v_t ~ N(0, R).

    transitions[t-1] and offsets[t-1] move timestep t to t+1, for t = 1..n-1."""

    labels: Tuple[str, ...]
    transitions: numpy.ndarray
    offsets: numpy.ndarray
    process_noise: numpy.ndarray
    observation: numpy.ndarray
    observation_noise: float
    prior: GaussianBelief

    @property
    def dimension(self) -> int:
        """"""
        return len(self.labels)

    @property
    def window(self) -> int:
        """Number of timesteps the system covers."""
        return len(self.transitions) + 1

    def F(self, t: int) -> numpy.ndarray:
        """"""
        return self.transitions[t - 1]

    def c(self, t: int) -> numpy.ndarray:
        """"""
        return self.offsets[t - 1]

    def Q(self, t: int) -> numpy.ndarray:
        """"""
        return self.process_noise

    def rollout(self, start: Sequence[float], rng: numpy.random.Generator = None) -> numpy.ndarray:
        """
        States at timesteps 1..window from z(1) = start; noiseless without rng.

        :return: array of shape (window, dimension)"""
        states = numpy.empty((self.window, self.dimension))
        states[0] = start
        noise_std = numpy.sqrt(numpy.diag(self.process_noise))
        for t in range(1, self.window):
            states[t] = self.F(t) @ states[t - 1] + self.c(t)
            if rng is not None:
                states[t] += noise_std * rng.standard_normal(self.dimension)
        return states


@dataclass(frozen=True)
class ParameterPriors:
    """
    Prior means and spreads of the kinematic state at the first timestep and of the set-points."""

    lon_state: Tuple[float, float]
    lat_state: Tuple[float, float]
    g_mean: float
    v_mean: float
    p_mean: float
    sigma_g: float = 2.0
    sigma_v: float = 2.0
    sigma_p: float = 1.5
    position_std: float = 0.05
    velocity_std: float = 2.0


def lon_control(
    state: AxisState, g_star: float, v_star: float, leader: AxisState, kc: int, mats: StepMatrices
) -> float:
    """
    Car-following input: first step of the minimum-norm plan reaching, after kc steps, the desired gap
    behind a leader assumed to keep its current speed, at the desired speed.

    :param state: target longitudinal state
    :param g_star: desired gap, meters
    :param v_star: desired speed, meters/second
    :param leader: leader longitudinal state
    :param kc: planning horizon, steps
    :param mats: step matrices"""
    g_x, g_f = first_input_gains(kc, mats)
    target = numpy.array([leader.position + kc * mats.dt * leader.velocity - g_star, v_star])
    return float(g_x @ state.as_array() + g_f @ target)


def lon_control_no_lead(velocity: float, v_star: float, kf: int) -> float:
    """
    Free-driving input closing the speed error over kf steps."""
    if kf < 1:
        raise ValueError(f"Free-driving horizon must be at least 1 step, got {kf}")
    return (v_star - velocity) / kf


def lat_horizon(k: int, t: int, ks: int) -> int:
    """
    Lateral planning horizon at elapsed step t of a lane change with k steps remaining at the first timestep:
    k - t while more than two steps remain, the lane-keep horizon ks otherwise."""
    if t < 0:
        raise ValueError(f"Elapsed steps cannot be negative, got {t}")
    return k - t if k - t > 2 else ks


def lat_gains(k: int, t: int, ks: int, mats: StepMatrices) -> Tuple[numpy.ndarray, float]:
    """
    Linear map of the lateral input, u = G_x (p2, v2) + g_p p_m.

    A lane change planned over at least three steps finishes on the tail of its last horizon-3 plan: the
    horizon-2 plan with two steps left, then the input stopping the lateral motion. Every other step uses
    the first input of the minimum-norm plan over lat_horizon(k, t, ks).

    :return: (G_x, g_p)"""
    remaining = k - t
    if k > 2 and remaining == 1:
        return STOP_GAINS, 0.0
    horizon = 2 if k > 2 and remaining == 2 else lat_horizon(k, t, ks)
    g_x, g_f = first_input_gains(horizon, mats)
    return g_x, float(g_f[0])


def lat_control(state: AxisState, p_m: float, k: int, t: int, ks: int, mats: StepMatrices) -> float:
    """
    Lane-change input steering towards lateral position p_m at rest, see lat_gains.

    :param state: target lateral state
    :param p_m: lateral target, meters
    :param k: merge steps remaining at the first timestep
    :param t: elapsed steps since the first timestep
    :param ks: lane-keep horizon, steps"""
    g_x, g_p = lat_gains(k, t, ks, mats)
    return float(g_x @ state.as_array() + g_p * p_m)


def _finite_difference(track_positions: numpy.ndarray, steps: Sequence[int], dt: float) -> float:
    (ta, pa), (tb, pb) = [(t, track_positions[t - 1]) for t in steps]
    return float((pb - pa) / ((tb - ta) * dt))


def priors_from_observations(
    scene: Scene,
    lane_center: float,
    leader: Optional[int],
    leader_track: SmoothedTrack = None,
    *,
    sigma_g: float = 2.0,
    sigma_v: float = 2.0,
    sigma_p: float = 1.5,
    position_std: float = 0.05,
    velocity_std: float = 2.0,
) -> ParameterPriors:
    """
    Set-point priors anchored at the end of the observation window, where the driver is assumed closest to
    achieving them, plus the kinematic prior at the first timestep.

    The desired gap is centered on the leader-target distance at timestep n, the desired speed on the finite
    difference of the last two observed target positions, the lateral target on the lane center.

    :param scene:
    :param lane_center: center of the candidate lane, meters
    :param leader: candidate leader id, None for free driving
    :param leader_track: smoothed leader states over the window; raw observations are used when omitted"""
    steps = scene.target.observed_steps
    if len(steps) < 2:
        raise InputError(f"Scene {scene.scene_id}: the target needs at least two observed timesteps")
    lon = scene.target.positions[:, 0]
    lat = scene.target.positions[:, 1]

    v_mean = _finite_difference(lon, steps[-2:], scene.dt)
    if scene.target.observed(scene.n):
        target_at_n = float(lon[scene.n - 1])
    else:
        target_at_n = float(lon[steps[-1] - 1] + (scene.n - steps[-1]) * scene.dt * v_mean)

    g_mean = 0.0
    if leader is not None:
        if leader_track is not None:
            leader_at_n = float(leader_track.lon[scene.n - 1, 0])
        else:
            track = scene.other(leader)
            if not track.observed(scene.n):
                raise InputError(
                    f"Scene {scene.scene_id}: leader {leader} unobserved at timestep {scene.n} "
                    "and not smoothed"
                )
            leader_at_n = float(track.position(scene.n)[0])
        g_mean = leader_at_n - target_at_n

    first_two = steps[:2]
    return ParameterPriors(
        lon_state=(float(lon[0]), _finite_difference(lon, first_two, scene.dt)),
        lat_state=(float(lat[0]), _finite_difference(lat, first_two, scene.dt)),
        g_mean=g_mean,
        v_mean=v_mean,
        p_mean=float(lane_center),
        sigma_g=sigma_g,
        sigma_v=sigma_v,
        sigma_p=sigma_p,
        position_std=position_std,
        velocity_std=velocity_std,
    )


def _axis_noise(dimension: int, sigma: float) -> numpy.ndarray:
    noise = numpy.zeros((dimension, dimension))
    noise[1, 1] = sigma ** 2
    return noise


def build_lon_system(
    model: LongitudinalModel,
    leader_track: Optional[Sequence[AxisState]],
    priors: ParameterPriors,
    mats: StepMatrices,
    n: int,
    obs_noise_std: float = 0.05,
) -> AugmentedSystem:
    """
    Longitudinal system over z = (p1, v1, g*, v*).

    With a leader, v1 moves by G_x (p1, v1) - G_f[0] g* + G_f[1] v* + G_f[0] (leader position + kc dt leader
    speed); the last term is the exogenous offset. Without a leader, v1 moves by (v* - v1) / kc.

    :param model: longitudinal hypothesis
    :param leader_track: leader states at timesteps 1..n, None for free driving
    :param priors:
    :param mats:
    :param n: window length
    :param obs_noise_std: std of the position observations, meters"""
    transition = numpy.eye(4)
    transition[:2, :2] = mats.A
    offsets = numpy.zeros((n - 1, 4))
    if model.leader is None:
        if leader_track is not None:
            raise InputError("Free-driving hypothesis given a leader track")
        transition[1, 1] += -1.0 / model.horizon_kc
        transition[1, 3] = 1.0 / model.horizon_kc
    else:
        if leader_track is None or len(leader_track) < n:
            raise InputError(f"Leader {model.leader} track must cover the {n}-step window")
        g_x, g_f = first_input_gains(model.horizon_kc, mats)
        transition[1, :2] += g_x
        transition[1, 2] = -g_f[0]
        transition[1, 3] = g_f[1]
        reach = model.horizon_kc * mats.dt
        offsets[:, 1] = [
            g_f[0] * (state.position + reach * state.velocity) for state in leader_track[: n - 1]
        ]

    prior = GaussianBelief.from_std(
        (*priors.lon_state, priors.g_mean, priors.v_mean),
        (priors.position_std, priors.velocity_std, model.sigma_g, model.sigma_v),
    )
    return AugmentedSystem(
        labels=LON_LABELS,
        transitions=numpy.repeat(transition[None], n - 1, axis=0),
        offsets=offsets,
        process_noise=_axis_noise(4, model.sigma_lon),
        observation=numpy.array([[1.0, 0.0, 0.0, 0.0]]),
        observation_noise=obs_noise_std ** 2,
        prior=prior,
    )


def build_lat_system(
    model: LateralModel, priors: ParameterPriors, mats: StepMatrices, n: int, obs_noise_std: float = 0.05
) -> AugmentedSystem:
    """
    Lateral system over w = (p2, v2, p_m); the horizon, and with it the transition, changes per step until
    the lane change ends.

    :param model: lateral hypothesis
    :param priors:
    :param mats:
    :param n: window length
    :param obs_noise_std: std of the position observations, meters"""
    transitions = numpy.empty((n - 1, 3, 3))
    for t in range(1, n):
        g_x, g_p = lat_gains(model.merge_steps, t - 1, model.keep_horizon_ks, mats)
        transition = numpy.eye(3)
        transition[:2, :2] = mats.A
        transition[1, :2] += g_x
        transition[1, 2] = g_p
        transitions[t - 1] = transition

    prior = GaussianBelief.from_std(
        (*priors.lat_state, priors.p_mean), (priors.position_std, priors.velocity_std, model.sigma_p)
    )
    return AugmentedSystem(
        labels=LAT_LABELS,
        transitions=transitions,
        offsets=numpy.zeros((n - 1, 3)),
        process_noise=_axis_noise(3, model.sigma_lat),
        observation=numpy.array([[1.0, 0.0, 0.0]]),
        observation_noise=obs_noise_std ** 2,
        prior=prior,
    )
