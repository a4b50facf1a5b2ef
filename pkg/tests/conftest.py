#!/usr/bin/env python3
# -*- coding: utf-8 -*-

__author__ = "Christian Heider Nielsen"
__doc__ = r"""
Canonical scenes shared by the test modules.

           Created on 18/10/2026
           """

import numpy
import pytest

from highwaybma.config import RunConfig
from highwaybma.scene import Scene, Track, lanes_from_boundaries

DT = 0.1
N = 30
T = 80


def linear_track(vehicle_id, start, velocity, length, observed=None):
    """Constant-velocity positions; observed defaults to every timestep."""
    times = numpy.arange(length)[:, None] * DT
    positions = numpy.asarray(start, dtype=float) + times * numpy.asarray(velocity, dtype=float)
    mask = range(1, length + 1) if observed is None else observed
    return Track(vehicle_id, positions, frozenset(mask))


def make_scene(target, others=(), boundaries=(0.0, 4.0, 8.0), scene_id="scene", n=N, horizon=T):
    """"""
    return Scene(
        scene_id=scene_id,
        target=target,
        others=tuple(others),
        lanes=tuple(lanes_from_boundaries(boundaries)),
        dt=DT,
        n=n,
        T=horizon,
    )


@pytest.fixture
def free_scene():
    """One lane, no surrounding vehicles, target cruising at 20 m/s on the lane center."""
    target = linear_track(1, (0.0, 2.0), (20.0, 0.0), T, observed=range(1, N + 1))
    return make_scene(target, boundaries=(0.0, 4.0))


@pytest.fixture
def two_lane_scene():
    """
    Target in lane 0 at 20 m/s, a slower leader 30 m ahead in lane 0, a vehicle 15 m ahead in lane 1 and one
    far behind in lane 1."""
    target = linear_track(1, (0.0, 2.0), (20.0, 0.0), T, observed=range(1, N + 1))
    leader = linear_track(2, (30.0, 2.0), (18.0, 0.0), N)
    beside = linear_track(3, (15.0, 6.0), (21.0, 0.0), N)
    behind = linear_track(4, (-40.0, 6.0), (20.0, 0.0), N)
    return make_scene(target, (leader, beside, behind))


@pytest.fixture
def quiet_config():
    """Defaults with a short merge grid and no rollout noise."""
    return RunConfig(merge_max_s=2.0, merge_step_s=1.0, n_samples=2, rollout_noise=False)
