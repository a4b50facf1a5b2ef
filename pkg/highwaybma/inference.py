#!/usr/bin/env python3
# -*- coding: utf-8 -*-

__author__ = "Christian Heider Nielsen"
__doc__ = r"""
Kalman filtering per component, marginal likelihoods, Bayesian model averaging over (lane, leader, merge
duration) components, posterior sampling and forward propagation of sampled trajectories.

           Created on 18/10/2026
           """

__all__ = [
    "GaussianBelief",
    "ComponentModel",
    "ComponentResult",
    "WeightedTrajectory",
    "PredictionSet",
    "kalman_filter",
    "component_weights",
    "sample_theta",
    "propagate",
    "build_components",
    "predict",
]

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy
from filterpy.kalman import KalmanFilter
from scipy.special import softmax

from highwaybma.behavior_models import (
    AugmentedSystem,
    LateralModel,
    LongitudinalModel,
    build_lat_system,
    build_lon_system,
    lat_gains,
    priors_from_observations,
)
from highwaybma.config import RunConfig
from highwaybma.errors import NoViableComponentError, NonPSDCovarianceError
from highwaybma.gaussian import GaussianBelief
from highwaybma.kinematics import AxisState, StepMatrices, first_input_gains, step_matrices
from highwaybma.scene import CandidatePair, Scene, candidate_set
from highwaybma.sensing import SmoothedTrack, smooth_track_cv

logger = logging.getLogger(__name__)

_UNIT_INPUT = numpy.ones((1, 1))


@dataclass(frozen=True, eq=False)
class ComponentModel:
    """
    One (lane, leader, merge duration) hypothesis with its longitudinal and lateral systems."""

    pair: CandidatePair
    merge_steps: int
    lon_model: LongitudinalModel
    lat_model: LateralModel
    lon_system: AugmentedSystem
    lat_system: AugmentedSystem
    leader_state: Optional[AxisState] = None


@dataclass(frozen=True, eq=False)
class ComponentResult:
    pair: CandidatePair
    merge_steps: int
    merge_seconds: float
    log_marginal: float
    weight: float
    lon_posterior: GaussianBelief
    lat_posterior: GaussianBelief

    def to_dict(self) -> dict:
        """"""
        return {
            "lane": self.pair.lane,
            "leader": self.pair.leader,
            "k_seconds": self.merge_seconds,
            "log_marginal": self.log_marginal,
            "weight": self.weight,
        }


@dataclass(frozen=True, eq=False)
class WeightedTrajectory:
    """
    Sampled positions at timesteps n+1..T, shape (T - n, 2), with its share of the probability mass."""

    weight: float
    positions: numpy.ndarray
    component: int = -1

    def points(self, n: int) -> List[dict]:
        """"""
        return [
            {"t": n + offset, "x": float(x), "y": float(y)}
            for offset, (x, y) in enumerate(self.positions, start=1)
        ]


@dataclass(frozen=True, eq=False)
class PredictionSet:
    scene_id: str
    dt: float
    n: int
    T: int
    components: Tuple[ComponentResult, ...]
    samples: Tuple[WeightedTrajectory, ...]

    def to_dict(self) -> dict:
        """"""
        return {
            "scene_id": self.scene_id,
            "dt": self.dt,
            "n": self.n,
            "T": self.T,
            "components": [component.to_dict() for component in self.components],
            "samples": [
                {"weight": sample.weight, "component": sample.component, "points": sample.points(self.n)}
                for sample in self.samples
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PredictionSet":
        """
        Rebuild from the archive form; component posteriors are not archived and come back empty."""
        n, horizon = int(data["n"]), int(data["T"])
        components = tuple(
            ComponentResult(
                pair=CandidatePair(int(c["lane"]), None if c["leader"] is None else int(c["leader"])),
                merge_steps=int(round(c["k_seconds"] / data["dt"])),
                merge_seconds=float(c["k_seconds"]),
                log_marginal=float(c["log_marginal"]),
                weight=float(c["weight"]),
                lon_posterior=None,
                lat_posterior=None,
            )
            for c in data["components"]
        )
        samples = []
        for sample in data["samples"]:
            positions = numpy.full((horizon - n, 2), numpy.nan)
            for point in sample["points"]:
                positions[int(point["t"]) - n - 1] = (point["x"], point["y"])
            component = int(sample.get("component", -1))
            samples.append(WeightedTrajectory(float(sample["weight"]), positions, component))
        return cls(str(data["scene_id"]), float(data["dt"]), n, horizon, components, tuple(samples))


def kalman_filter(
    system: AugmentedSystem, observations: Sequence[Optional[float]]
) -> Tuple[GaussianBelief, float]:
    """
    Predict/update recursion over the window; unobserved timesteps (None or NaN) are predicted only.

    :param system: augmented linear-Gaussian system starting from its prior at timestep 1
    :param observations: scalar position per timestep 1..n
    :return: posterior belief at timestep n and the log marginal likelihood of the observed values"""
    if len(observations) != system.window:
        raise ValueError(f"Expected {system.window} observations, got {len(observations)}")
    kf = KalmanFilter(dim_x=system.dimension, dim_z=1)
    kf.x = system.prior.mean.reshape(-1, 1).copy()
    kf.P = numpy.array(system.prior.covariance)
    kf.H = system.observation
    kf.R = numpy.array([[system.observation_noise]])

    log_marginal = 0.0
    for t, z in enumerate(observations, start=1):
        if t > 1:
            kf.predict(u=_UNIT_INPUT, B=system.c(t - 1).reshape(-1, 1), F=system.F(t - 1), Q=system.Q(t - 1))
        if z is None or not math.isfinite(z):
            continue
        kf.update(z)
        log_marginal += float(kf.log_likelihood)
        GaussianBelief(kf.x, kf.P).check_psd(f"update at timestep {t}")
    return GaussianBelief(kf.x, kf.P), log_marginal


def component_weights(log_marginals: Sequence[float]) -> numpy.ndarray:
    """
    Normalized evidence under a uniform prior over components, computed in log space."""
    values = numpy.asarray(log_marginals, dtype=float)
    if values.size == 0:
        raise ValueError("No components to weigh")
    if numpy.any(numpy.isnan(values)) or numpy.any(values == numpy.inf):
        raise ValueError(f"Log marginals must be finite or -inf, got {values}")
    if numpy.all(values == -numpy.inf):
        raise NoViableComponentError("Every component has zero marginal likelihood")
    return softmax(values)


def sample_theta(
    lon_belief: GaussianBelief, lat_belief: GaussianBelief, rng: numpy.random.Generator
) -> numpy.ndarray:
    """
    Independent draws from the two axis posteriors, concatenated as (p1, v1, g*, v*, p2, v2, p_m)."""
    draws = []
    for belief in (lon_belief, lat_belief):
        try:
            draws.append(
                rng.multivariate_normal(belief.mean, belief.covariance, method="eigh", check_valid="raise")
            )
        except (ValueError, numpy.linalg.LinAlgError) as e:
            raise NonPSDCovarianceError(f"Cannot factor posterior covariance: {e}") from e
    return numpy.concatenate(draws)


def propagate(
    theta: Sequence[float],
    component: ComponentModel,
    scene: Scene,
    rng: numpy.random.Generator,
    include_noise: bool = True,
    clamp_leader: bool = False,
) -> numpy.ndarray:
    """
    Forward-simulate both axes from timestep n to T under the component's control laws. The leader keeps its
    smoothed speed at n; the target's longitudinal speed is floored at zero after every step.

    :param theta: (p1, v1, g*, v*, p2, v2, p_m) at timestep n
    :param component: hypothesis to roll out
    :param scene: supplies dt, n and T
    :param rng: input noise source
    :param include_noise: add the models' input noise
    :param clamp_leader: floor the leader's speed at zero too
    :return: positions at timesteps n+1..T, shape (T - n, 2)"""
    mats = step_matrices(scene.dt)
    p1, v1, g_star, v_star, p2, v2, p_m = (float(value) for value in theta)
    v1 = max(v1, 0.0)
    lon_model, lat_model = component.lon_model, component.lat_model
    lon_std = lon_model.sigma_lon if include_noise else 0.0
    lat_std = lat_model.sigma_lat if include_noise else 0.0

    leader = component.leader_state
    if leader is not None:
        g_x, g_f = first_input_gains(lon_model.horizon_kc, mats)
        leader_speed = max(leader.velocity, 0.0) if clamp_leader else leader.velocity
        reach = lon_model.horizon_kc * mats.dt

    steps = scene.T - scene.n
    positions = numpy.empty((steps, 2))
    for offset, t in enumerate(range(scene.n, scene.T)):
        if leader is None:
            u1 = (v_star - v1) / lon_model.horizon_kc
        else:
            leader_position = leader.position + (t - scene.n) * mats.dt * leader_speed
            target_position = leader_position + reach * leader_speed - g_star
            u1 = g_x[0] * p1 + g_x[1] * v1 + g_f[0] * target_position + g_f[1] * v_star

        k_x, k_p = lat_gains(lat_model.merge_steps, t - 1, lat_model.keep_horizon_ks, mats)
        u2 = k_x[0] * p2 + k_x[1] * v2 + k_p * p_m

        if include_noise:
            u1 += lon_std * rng.standard_normal()
            u2 += lat_std * rng.standard_normal()
        p1, v1 = p1 + mats.dt * v1, max(v1 + u1, 0.0)
        p2, v2 = p2 + mats.dt * v2, v2 + u2
        positions[offset] = (p1, p2)
    return positions


def _observations(scene: Scene, axis: int) -> List[Optional[float]]:
    target = scene.target
    return [float(target.position(t)[axis]) if target.observed(t) else None for t in range(1, scene.n + 1)]


def build_components(
    scene: Scene, config: RunConfig
) -> Tuple[List[ComponentModel], Dict[Optional[int], SmoothedTrack]]:
    """
    Every (lane, leader, merge duration) component of the scene in deterministic order: candidate pairs by
    lane then leader id, merge durations ascending within each pair."""
    mats = step_matrices(scene.dt)
    pairs = candidate_set(scene, config.tau_f, config.tau_r)
    leaders = sorted({pair.leader for pair in pairs if pair.leader is not None})
    smoothed = {
        j: smooth_track_cv(
            scene.other(j),
            scene.dt,
            config.sensor.smoother_obs_std,
            config.lon_noise,
            config.sensor.smoother_velocity_std,
        )
        for j in leaders
    }
    lanes = scene.lane_map

    components = []
    for pair in pairs:
        leader_track = smoothed.get(pair.leader)
        priors = priors_from_observations(
            scene,
            lanes[pair.lane].center,
            pair.leader,
            leader_track,
            sigma_g=config.sigma_g,
            sigma_v=config.sigma_v,
            sigma_p=config.sigma_p,
            position_std=config.init_position_std,
            velocity_std=config.init_velocity_std,
        )
        lon_model = LongitudinalModel(
            pair.leader, config.follow_horizon_steps, config.sigma_g, config.sigma_v, config.lon_noise
        )
        leader_states = None
        if leader_track is not None:
            leader_states = [leader_track.lon_state(t) for t in range(1, scene.n + 1)]
        lon_system = build_lon_system(lon_model, leader_states, priors, mats, scene.n, config.obs_noise_std)
        for k in config.merge_grid_steps(scene.dt):
            lat_model = LateralModel(
                lanes[pair.lane].center, k, config.keep_horizon_steps, config.sigma_p, config.sigma_lat
            )
            components.append(
                ComponentModel(
                    pair=pair,
                    merge_steps=k,
                    lon_model=lon_model,
                    lat_model=lat_model,
                    lon_system=lon_system,
                    lat_system=build_lat_system(lat_model, priors, mats, scene.n, config.obs_noise_std),
                    leader_state=None if leader_states is None else leader_states[-1],
                )
            )
    return components, smoothed


def _sample_component(task: tuple) -> List[numpy.ndarray]:
    component, lon_posterior, lat_posterior, scene, seed, n_samples, include_noise, clamp_leader = task
    rng = numpy.random.default_rng(seed)
    rollouts = []
    for _ in range(n_samples):
        theta = sample_theta(lon_posterior, lat_posterior, rng)
        rollouts.append(propagate(theta, component, scene, rng, include_noise, clamp_leader))
    return rollouts


def predict(
    scene: Scene, config: RunConfig, rng: numpy.random.Generator, mapper: Callable[..., Iterable] = map
) -> PredictionSet:
    """
    Bayesian model average over every component of the scene: filter each component's longitudinal and
    lateral systems, weigh components by the product of the two marginal likelihoods, and sample
    config.n_samples trajectories per component, each carrying an equal share of the component's weight.

    The longitudinal filter only depends on the leader and the lateral filter only on (lane, merge
    duration), so each distinct system is filtered once.

    :param scene:
    :param config:
    :param rng: source of the per-component seeds, drawn in component order
    :param mapper: map-like callable used to sample components, e.g. an executor's map; results are reduced
    in component order whatever the completion order"""
    if config.no_interaction:
        scene = scene.without_others()
    if not math.isclose(scene.dt, config.dt):
        logger.warning(f"Scene {scene.scene_id}: timestep {scene.dt} differs from configured {config.dt}")

    components, _ = build_components(scene, config)
    lon_observations = _observations(scene, 0)
    lat_observations = _observations(scene, 1)

    lon_results, lat_results = {}, {}
    log_marginals = []
    for component in components:
        lon_key = component.pair.leader
        if lon_key not in lon_results:
            lon_results[lon_key] = kalman_filter(component.lon_system, lon_observations)
        lat_key = (component.pair.lane, component.merge_steps)
        if lat_key not in lat_results:
            lat_results[lat_key] = kalman_filter(component.lat_system, lat_observations)
        log_marginals.append(lon_results[lon_key][1] + lat_results[lat_key][1])

    weights = component_weights(log_marginals)
    seeds = rng.integers(0, 2 ** 63 - 1, size=len(components))
    tasks = [
        (
            component,
            lon_results[component.pair.leader][0],
            lat_results[(component.pair.lane, component.merge_steps)][0],
            scene,
            int(seed),
            config.n_samples,
            config.rollout_noise,
            config.clamp_leader,
        )
        for component, seed in zip(components, seeds)
    ]

    results, samples = [], []
    for index, (component, log_marginal, weight, rollouts) in enumerate(
        zip(components, log_marginals, weights, mapper(_sample_component, tasks))
    ):
        results.append(
            ComponentResult(
                pair=component.pair,
                merge_steps=component.merge_steps,
                merge_seconds=round(component.merge_steps * scene.dt, 10),
                log_marginal=float(log_marginal),
                weight=float(weight),
                lon_posterior=lon_results[component.pair.leader][0],
                lat_posterior=lat_results[(component.pair.lane, component.merge_steps)][0],
            )
        )
        share = float(weight) / config.n_samples
        samples.extend(WeightedTrajectory(share, positions, index) for positions in rollouts)

    logger.debug(f"Scene {scene.scene_id}: {len(components)} components, {len(samples)} samples")
    return PredictionSet(scene.scene_id, scene.dt, scene.n, scene.T, tuple(results), tuple(samples))
