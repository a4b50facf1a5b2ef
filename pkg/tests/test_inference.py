#!/usr/bin/env python3
# -*- coding: utf-8 -*-

__author__ = "Christian Heider Nielsen"
__doc__ = r"""

           Created on 18/10/2026
           """

import math
from concurrent.futures import ThreadPoolExecutor

import numpy
import pytest
from scipy.stats import multivariate_normal, norm

from highwaybma.behavior_models import AugmentedSystem
from highwaybma.config import RunConfig
from highwaybma.errors import NoViableComponentError
from highwaybma.inference import (
    GaussianBelief,
    PredictionSet,
    build_components,
    component_weights,
    kalman_filter,
    predict,
    propagate,
    sample_theta,
)
from highwaybma.scene import CandidatePair
from highwaybma.synthetic import SyntheticScenario, simulate_scene

from .conftest import linear_track, make_scene


def _system(transitions, offsets, process_noise, observation, observation_noise, prior):
    dimension = len(prior.mean)
    return AugmentedSystem(
        labels=tuple(f"z{i}" for i in range(dimension)),
        transitions=numpy.asarray(transitions, dtype=float).reshape(-1, dimension, dimension),
        offsets=numpy.asarray(offsets, dtype=float).reshape(-1, dimension),
        process_noise=numpy.asarray(process_noise, dtype=float),
        observation=numpy.asarray(observation, dtype=float),
        observation_noise=observation_noise,
        prior=prior,
    )


def test_scalar_conjugate_update():
    system = _system(
        numpy.zeros((0, 1, 1)), numpy.zeros((0, 1)), [[0.0]], [[1.0]], 1.0, GaussianBelief([0.0], [[1.0]])
    )
    posterior, log_marginal = kalman_filter(system, [1.0])
    assert posterior.mean == pytest.approx([0.5])
    assert posterior.covariance == pytest.approx(numpy.array([[0.5]]))
    assert log_marginal == pytest.approx(norm.logpdf(1.0, 0.0, math.sqrt(2.0)))


def test_no_observations_propagates_the_prior():
    transition = [[1.0, 0.1], [0.0, 1.0]]
    prior = GaussianBelief([0.0, 2.0], numpy.diag([1.0, 0.5]))
    system = _system([transition] * 4, numpy.zeros((4, 2)), numpy.zeros((2, 2)), [[1.0, 0.0]], 0.01, prior)
    posterior, log_marginal = kalman_filter(system, [None, float("nan"), None, None, None])
    a = numpy.linalg.matrix_power(numpy.array(transition), 4)
    assert log_marginal == 0.0
    assert posterior.mean == pytest.approx(a @ prior.mean)
    assert posterior.covariance == pytest.approx(a @ prior.covariance @ a.T)


def test_observation_count_must_match_window():
    prior = GaussianBelief([0.0], [[1.0]])
    system = _system(numpy.zeros((2, 1, 1)), numpy.zeros((2, 1)), [[0.0]], [[1.0]], 1.0, prior)
    with pytest.raises(ValueError):
        kalman_filter(system, [1.0, 2.0])


def _joint_gaussian_oracle(system, observations):
    """Log density of the observed values and the posterior at n by explicit marginalisation."""
    n, d = system.window, system.dimension
    means, covariances = [system.prior.mean], [system.prior.covariance]
    for t in range(1, n):
        means.append(system.F(t) @ means[-1] + system.c(t))
        covariances.append(system.F(t) @ covariances[-1] @ system.F(t).T + system.Q(t))

    def cross(s, t):
        """Cov(z_s, z_t) for s <= t, 1-based."""
        block = covariances[s - 1]
        for u in range(s, t):
            block = system.F(u) @ block
        return block.T

    observed = [t for t, z in enumerate(observations, start=1) if z is not None]
    h = system.observation
    mu_y = numpy.array([(h @ means[t - 1]).item() for t in observed])
    sigma_yy = numpy.empty((len(observed), len(observed)))
    for a, s in enumerate(observed):
        for b, t in enumerate(observed):
            block = cross(min(s, t), max(s, t))
            sigma_yy[a, b] = (h @ block @ h.T).item() + (system.observation_noise if s == t else 0.0)
    sigma_zy = numpy.column_stack([cross(t, n).T @ h.T for t in observed]).reshape(d, len(observed))
    y = numpy.array([observations[t - 1] for t in observed])

    log_density = multivariate_normal(mu_y, sigma_yy).logpdf(y)
    gain = sigma_zy @ numpy.linalg.inv(sigma_yy)
    mean = means[-1] + gain @ (y - mu_y)
    covariance = covariances[-1] - gain @ sigma_zy.T
    return log_density, mean, covariance


def test_filter_matches_joint_gaussian_oracle():
    rng = numpy.random.default_rng(3)
    for _ in range(200):
        n = int(rng.integers(2, 11))
        d = int(rng.integers(2, 5))
        transitions = numpy.eye(d) + 0.2 * rng.standard_normal((n - 1, d, d))
        offsets = rng.standard_normal((n - 1, d))
        process_noise = numpy.diag(rng.uniform(0.01, 0.5, d))
        observation = numpy.zeros((1, d))
        observation[0, 0] = 1.0
        spread = rng.standard_normal((d, d))
        prior = GaussianBelief(rng.standard_normal(d), spread @ spread.T + 0.1 * numpy.eye(d))
        noise = float(rng.uniform(0.05, 1.0))
        system = _system(transitions, offsets, process_noise, observation, noise, prior)

        observations = [float(v) for v in rng.standard_normal(n) * 2.0]
        for t in range(1, n):
            if rng.random() < 0.3:
                observations[t] = None

        posterior, log_marginal = kalman_filter(system, observations)
        log_density, mean, covariance = _joint_gaussian_oracle(system, observations)
        assert log_marginal == pytest.approx(log_density, rel=1e-6, abs=1e-9)
        assert posterior.mean == pytest.approx(mean, rel=1e-6, abs=1e-8)
        assert posterior.covariance == pytest.approx(covariance, rel=1e-6, abs=1e-7)


@pytest.mark.parametrize(
    ["log_marginals", "expected"],
    (([-3.0], [1.0]), ([2.0, 2.0, 2.0, 2.0], [0.25] * 4), ([math.log(3.0), 0.0], [0.75, 0.25])),
    ids=["single", "uniform", "ln3"],
)
def test_component_weights(log_marginals, expected):
    assert component_weights(log_marginals) == pytest.approx(expected, abs=1e-12)


def test_component_weights_are_shift_and_permutation_invariant():
    rng = numpy.random.default_rng(0)
    values = rng.normal(-500.0, 20.0, 12)
    weights = component_weights(values)
    assert math.fsum(weights) == pytest.approx(1.0, abs=1e-12)
    assert component_weights(values + 1234.5) == pytest.approx(weights, abs=1e-12)
    order = rng.permutation(12)
    assert component_weights(values[order]) == pytest.approx(weights[order], abs=1e-12)


def test_component_weights_tolerate_some_impossible_components():
    assert component_weights([0.0, -numpy.inf]) == pytest.approx([1.0, 0.0])


def test_component_weights_errors():
    with pytest.raises(NoViableComponentError):
        component_weights([-numpy.inf, -numpy.inf])
    with pytest.raises(ValueError):
        component_weights([])


def test_sample_theta_degenerate_is_the_mean():
    lon = GaussianBelief([1.0, 2.0, 3.0, 4.0], numpy.zeros((4, 4)))
    lat = GaussianBelief([5.0, 6.0, 7.0], numpy.zeros((3, 3)))
    assert sample_theta(lon, lat, numpy.random.default_rng(0)).tolist() == [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]


def test_sample_theta_moments():
    rng = numpy.random.default_rng(11)
    spread = rng.standard_normal((4, 4))
    lon = GaussianBelief(rng.standard_normal(4), spread @ spread.T + numpy.eye(4))
    lat = GaussianBelief([0.0, 1.0, 6.0], numpy.diag([0.04, 0.25, 2.25]))
    draws = numpy.array([sample_theta(lon, lat, rng) for _ in range(20000)])
    mean = numpy.concatenate([lon.mean, lat.mean])
    std = numpy.sqrt(numpy.concatenate([numpy.diag(lon.covariance), numpy.diag(lat.covariance)]))
    assert numpy.all(numpy.abs(draws.mean(axis=0) - mean) < 4 * std / math.sqrt(len(draws)))
    assert numpy.cov(draws[:, :4].T) == pytest.approx(lon.covariance, rel=0.1, abs=0.1)
    assert numpy.abs(numpy.corrcoef(draws[:, 0], draws[:, 6])[0, 1]) < 0.05


def test_propagate_free_driving_at_desired_speed_is_constant_velocity(free_scene, quiet_config):
    components, _ = build_components(free_scene, quiet_config)
    theta = [58.0, 20.0, 0.0, 20.0, 2.0, 0.0, 2.0]
    for component in components:
        positions = propagate(theta, component, free_scene, numpy.random.default_rng(0), include_noise=False)
        expected = 58.0 + numpy.arange(1, 51) * 0.1 * 20.0
        assert positions[:, 0] == pytest.approx(expected, abs=1e-9)
        assert positions[:, 1] == pytest.approx(numpy.full(50, 2.0), abs=1e-12)


def test_propagated_velocity_never_turns_negative(free_scene, quiet_config):
    (component, *_), _ = build_components(free_scene, quiet_config)
    rng = numpy.random.default_rng(5)
    for _ in range(10_000):
        theta = [58.0, rng.uniform(0.0, 1.0), 0.0, -30.0, 2.0, 0.0, 2.0]
        positions = propagate(theta, component, free_scene, rng, include_noise=True)
        steps = numpy.diff(numpy.concatenate([[58.0], positions[:, 0]]))
        assert numpy.all(steps >= 0.0)


def test_propagate_follows_leader_at_its_speed(two_lane_scene, quiet_config):
    components, smoothed = build_components(two_lane_scene, quiet_config)
    component = next(c for c in components if c.pair == CandidatePair(0, 2))
    leader = smoothed[2].lon_state(30)
    assert component.leader_state == leader
    theta = [leader.position - 25.0, leader.velocity, 25.0, leader.velocity, 2.0, 0.0, 2.0]
    positions = propagate(theta, component, two_lane_scene, numpy.random.default_rng(0), include_noise=False)
    expected = leader.position - 25.0 + numpy.arange(1, 51) * 0.1 * leader.velocity
    assert positions[:, 0] == pytest.approx(expected, abs=1e-6)


def test_components_cover_pairs_and_merge_grid(two_lane_scene, quiet_config):
    components, _ = build_components(two_lane_scene, quiet_config)
    keys = [(c.pair.lane, c.pair.leader, c.merge_steps) for c in components]
    assert keys == [(0, 2, 0), (0, 2, 10), (0, 2, 20), (1, 3, 0), (1, 3, 10), (1, 3, 20)]


def test_predict_stationary_target_keeps_lane(quiet_config):
    target = linear_track(1, (0.0, 2.0), (0.0, 0.0), 80, observed=range(1, 31))
    scene = make_scene(target, boundaries=(0.0, 4.0))
    prediction = predict(scene, quiet_config, numpy.random.default_rng(0))
    assert {c.pair for c in prediction.components} == {CandidatePair(0, None)}
    assert math.fsum(s.weight for s in prediction.samples) == pytest.approx(1.0, abs=1e-12)
    final = numpy.array([s.positions[-1] for s in prediction.samples])
    assert numpy.all(final[:, 0] > -0.5)
    assert numpy.all(numpy.abs(final[:, 1] - 2.0) < 1.0)


def test_predict_weights_are_normalised(two_lane_scene):
    config = RunConfig(n_samples=3)
    prediction = predict(two_lane_scene, config, numpy.random.default_rng(1))
    assert len(prediction.components) == 2 * 25
    assert len(prediction.samples) == 3 * 50
    assert math.fsum(c.weight for c in prediction.components) == pytest.approx(1.0, abs=1e-12)
    assert math.fsum(s.weight for s in prediction.samples) == pytest.approx(1.0, abs=1e-12)
    assert all(s.positions.shape == (50, 2) for s in prediction.samples)


def test_predict_is_deterministic(two_lane_scene, quiet_config):
    first = predict(two_lane_scene, quiet_config, numpy.random.default_rng(42)).to_dict()
    second = predict(two_lane_scene, quiet_config, numpy.random.default_rng(42)).to_dict()
    assert first == second


def test_predict_with_parallel_mapper_matches_serial(two_lane_scene, quiet_config):
    serial = predict(two_lane_scene, quiet_config, numpy.random.default_rng(9)).to_dict()
    with ThreadPoolExecutor(max_workers=3) as executor:
        parallel = predict(two_lane_scene, quiet_config, numpy.random.default_rng(9), executor.map).to_dict()
    assert parallel == serial


def test_no_interaction_ignores_surrounding_vehicles(two_lane_scene, quiet_config):
    config = quiet_config.updated(no_interaction=True)
    prediction = predict(two_lane_scene, config, numpy.random.default_rng(0))
    assert {c.pair.leader for c in prediction.components} == {None}


def _merge_trials(rng, grid, count, keep_rate=0.0):
    """(start lane, target lane, merge seconds) of lane changes, with a share of lane keeps."""
    for _ in range(count):
        start_lane = int(rng.integers(0, 2))
        if rng.random() < keep_rate:
            yield start_lane, start_lane, 0.0
        else:
            yield start_lane, 1 - start_lane, float(rng.choice(grid))


def test_simulated_scenes_favour_the_generating_lane():
    config = RunConfig(n_samples=1, rollout_noise=False)
    grid = numpy.array(config.merge_grid_seconds())
    durations = grid[(grid >= 2.0) & (grid <= 5.0)]
    trials = list(_merge_trials(numpy.random.default_rng(2026), durations, 200, keep_rate=0.5))
    hits = 0
    for trial, (start_lane, target_lane, merge_s) in enumerate(trials):
        scenario = SyntheticScenario(start_lane=start_lane, target_lane=target_lane, merge_s=merge_s)
        scene = simulate_scene(scenario, numpy.random.default_rng([2026, trial]))
        prediction = predict(scene, config, numpy.random.default_rng(trial))
        hits += sum(c.weight for c in prediction.components if c.pair.lane == target_lane) > 0.5
    assert hits >= 0.9 * len(trials)


def test_generating_merge_duration_has_the_highest_marginal_in_its_lane():
    config = RunConfig(sigma_lat=1e-7, obs_noise_std=1e-5, init_position_std=1e-5)
    grid = numpy.array(config.merge_grid_seconds())
    trials = list(_merge_trials(numpy.random.default_rng(7), grid[(grid >= 1.0) & (grid <= 6.0)], 200))
    hits = 0
    for trial, (start_lane, target_lane, merge_s) in enumerate(trials):
        scenario = SyntheticScenario(
            start_lane=start_lane,
            target_lane=target_lane,
            merge_s=merge_s,
            sigma_lon=1e-7,
            sigma_lat=1e-7,
            obs_noise_std=1e-5,
        )
        scene = simulate_scene(scenario, numpy.random.default_rng([7, trial]))
        components, _ = build_components(scene, config)
        observations = [float(scene.target.position(t)[1]) for t in range(1, scene.n + 1)]
        marginals = {
            c.merge_steps: kalman_filter(c.lat_system, observations)[1]
            for c in components
            if c.pair.lane == target_lane
        }
        assert len(marginals) == 25
        hits += max(marginals, key=marginals.get) == scenario.merge_steps
    assert hits >= 0.95 * len(trials)


def test_predict_mean_matches_constant_velocity_in_the_noise_free_limit():
    target = linear_track(1, (0.0, 2.0), (20.0, 0.0), 80, observed=range(1, 31))
    scene = make_scene(target)
    config = RunConfig(sigma_lon=1e-8, sigma_lat=1e-8, obs_noise_std=1e-6, init_position_std=1e-6)
    prediction = predict(scene, config, numpy.random.default_rng(3))
    assert {c.pair.leader for c in prediction.components} == {None}
    weights = numpy.array([sample.weight for sample in prediction.samples])
    positions = numpy.array([sample.positions for sample in prediction.samples])
    mean = numpy.einsum("s,stk->tk", weights, positions)
    expected = numpy.array([target.position(t) for t in range(31, 81)])
    assert numpy.abs(mean - expected).max() < 1e-4


def test_prediction_document_round_trip(two_lane_scene, quiet_config):
    prediction = predict(two_lane_scene, quiet_config, numpy.random.default_rng(0))
    document = prediction.to_dict()
    assert set(document["components"][0]) == {"lane", "leader", "k_seconds", "log_marginal", "weight"}
    restored = PredictionSet.from_dict(document)
    assert restored.to_dict() == document
    assert restored.samples[3].positions == pytest.approx(prediction.samples[3].positions)
