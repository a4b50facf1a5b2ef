#!/usr/bin/env python3
# -*- coding: utf-8 -*-

__author__ = "Christian Heider Nielsen"
__doc__ = r"""

           Created on 18/10/2026
           """

import numpy
import pytest

from highwaybma.errors import InputError
from highwaybma.scene import Track
from highwaybma.sensing import SensorConfig, driver_view, occluded, smooth_track_cv

from .conftest import linear_track, make_scene


@pytest.mark.parametrize(
    ["obstacles", "expected"],
    (([], False), ([(10.0, 0.0)], True), ([(10.0, 2.5)], False)),
    ids=["no-obstacles", "midpoint", "perpendicular-2.5m"],
)
def test_occluded_fixtures(obstacles, expected):
    assert occluded((0.0, 0.0), (20.0, 0.0), obstacles) is expected


def test_occluded_is_symmetric():
    obstacles = [(7.0, 1.5), (30.0, -4.0)]
    assert occluded((0.0, 0.0), (20.0, 3.0), obstacles) == occluded((20.0, 3.0), (0.0, 0.0), obstacles)


def test_occluded_boundary_is_exclusive():
    assert not occluded((0.0, 0.0), (20.0, 0.0), [(10.0, 2.0)], radius=2.0)


def test_sensor_config_validates():
    with pytest.raises(ValueError):
        SensorConfig(range_lon=0.0)
    assert SensorConfig().min_obs_steps(0.1) == 10


def _ego():
    return linear_track(1, (0.0, 2.0), (20.0, 0.0), 80, observed=range(1, 31))


def test_vehicle_out_of_range_is_dropped():
    far = linear_track(2, (60.0, 2.0), (20.0, 0.0), 30)
    near = linear_track(3, (40.0, 6.0), (20.0, 0.0), 30)
    viewed = driver_view(make_scene(_ego(), (far, near)), 1)
    assert [track.vehicle_id for track in viewed.others] == [3]


def test_range_is_two_sided():
    behind = linear_track(2, (-45.0, 6.0), (20.0, 0.0), 30)
    far_behind = linear_track(3, (-55.0, 6.0), (20.0, 0.0), 30)
    viewed = driver_view(make_scene(_ego(), (behind, far_behind)), 1)
    assert [track.vehicle_id for track in viewed.others] == [2]


def test_vehicle_behind_an_obstruction_is_dropped():
    blocker = linear_track(2, (15.0, 2.0), (20.0, 0.0), 30)
    hidden = linear_track(3, (35.0, 2.0), (20.0, 0.0), 30)
    viewed = driver_view(make_scene(_ego(), (blocker, hidden)), 1)
    assert [track.vehicle_id for track in viewed.others] == [2]


def test_partially_visible_vehicle_keeps_partial_mask():
    # 0.05 m further ahead every step, past the 50 m range after 12 steps
    drifting = linear_track(2, (49.42, 6.0), (20.5, 0.0), 30)
    viewed = driver_view(make_scene(_ego(), (drifting,)), 1)
    (kept,) = viewed.others
    assert kept.observed_steps == list(range(1, 13))


@pytest.mark.parametrize(["visible", "kept"], ((9, False), (10, True)), ids=["0.9s", "1.0s"])
def test_duration_threshold(visible, kept):
    positions = numpy.array([[51.0 - 2.0 * visible + 2.0 * t, 6.0] for t in range(30)])
    ego = linear_track(1, (0.0, 2.0), (0.0, 0.0), 80, observed=range(1, 31))
    viewed = driver_view(make_scene(ego, (Track(2, positions, frozenset(range(1, 31))),)), 1)
    assert bool(viewed.others) is kept
    if kept:
        assert len(viewed.others[0].mask) == visible


def test_target_mask_is_untouched():
    blocker = linear_track(2, (15.0, 2.0), (20.0, 0.0), 30)
    scene = make_scene(_ego(), (blocker,))
    assert driver_view(scene, 2).target.mask == scene.target.mask


def test_ego_must_be_observed_throughout():
    partial = linear_track(2, (15.0, 2.0), (20.0, 0.0), 30, observed=range(5, 31))
    with pytest.raises(InputError):
        driver_view(make_scene(_ego(), (partial,)), 2)


def test_masks_grow_with_range():
    others = [
        linear_track(2 + i, (10.0 + 12.0 * i, 2.0 + 4.0 * (i % 2)), (19.0 + i, 0.0), 30) for i in range(6)
    ]
    scene = make_scene(_ego(), others)
    short = {t.vehicle_id: t.mask for t in driver_view(scene, 1, SensorConfig(range_lon=30.0)).others}
    long = {t.vehicle_id: t.mask for t in driver_view(scene, 1, SensorConfig(range_lon=60.0)).others}
    for vehicle_id, mask in short.items():
        assert mask <= long[vehicle_id]


def test_smoother_reproduces_linear_track():
    track = linear_track(2, (5.0, 3.0), (18.0, -0.4), 30)
    smoothed = smooth_track_cv(track, 0.1, sigma_obs=1e-4)
    assert smoothed.lon[:, 0] == pytest.approx(track.positions[:, 0], abs=1e-6)
    assert smoothed.lon[:, 1] == pytest.approx(numpy.full(30, 18.0), abs=1e-4)
    assert smoothed.lat[:, 1] == pytest.approx(numpy.full(30, -0.4), abs=1e-4)


def test_smoother_fills_gaps_on_the_line():
    track = linear_track(2, (5.0, 3.0), (18.0, 0.0), 30, observed=list(range(1, 11)) + list(range(21, 31)))
    smoothed = smooth_track_cv(track, 0.1, sigma_obs=1e-4)
    expected = 5.0 + numpy.arange(30) * 1.8
    assert smoothed.lon[:, 0] == pytest.approx(expected, abs=1e-5)


def test_smoother_single_observation():
    positions = numpy.full((30, 2), numpy.nan)
    positions[12] = (40.0, 6.0)
    smoothed = smooth_track_cv(Track(2, positions, frozenset({13})), 0.1, sigma_obs=0.05)
    assert smoothed.lon[:, 0] == pytest.approx(numpy.full(30, 40.0))
    assert smoothed.lon[:, 1] == pytest.approx(numpy.zeros(30))
    assert smoothed.lat_state(30).position == pytest.approx(6.0)


def test_smoother_extrapolates_before_the_first_observation():
    track = linear_track(2, (5.0, 3.0), (18.0, 0.0), 30, observed=range(6, 31))
    smoothed = smooth_track_cv(track, 0.1, sigma_obs=1e-4)
    assert smoothed.lon_state(1).position == pytest.approx(5.0, abs=1e-4)


def test_smoother_needs_an_observation():
    with pytest.raises(InputError):
        smooth_track_cv(Track(2, numpy.zeros((30, 2)), frozenset()), 0.1, sigma_obs=0.05)


def test_constant_position_has_zero_velocity():
    track = linear_track(2, (5.0, 3.0), (0.0, 0.0), 30)
    smoothed = smooth_track_cv(track, 0.1, sigma_obs=0.05)
    assert numpy.all(numpy.abs(smoothed.lon[:, 1]) < 1e-6)
