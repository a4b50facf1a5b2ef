#!/usr/bin/env python3
# -*- coding: utf-8 -*-

__author__ = "Christian Heider Nielsen"
__doc__ = r"""

           Created on 18/10/2026
           """

from concurrent.futures import ThreadPoolExecutor

import numpy

from benchmarks.benchmark_func import benchmark_func
from highwaybma import RunConfig, SyntheticScenario, predict, simulate_scene
from highwaybma.kinematics import _gains, _least_norm_map, first_input_gains, step_matrices


def gains_benchmark():
    """"""
    mats = step_matrices(0.1)

    def cold_gains():
        """"""
        _gains.cache_clear()
        _least_norm_map.cache_clear()
        return [first_input_gains(k, mats) for k in range(2, 121)]

    def warm_gains():
        """"""
        return [first_input_gains(k, mats) for k in range(2, 121)]

    for func in (cold_gains, warm_gains):
        t, _ = benchmark_func(func, times=20)
        print(f"{func.__name__}: {t / 20 * 1e3:.2f} ms per grid")


def predict_benchmark():
    """"""
    scenario = SyntheticScenario(target_lane=1, merge_s=6.0, leader_gap=30.0, lane_count=3)
    scene = simulate_scene(scenario, numpy.random.default_rng(0))
    config = RunConfig(n_samples=4)

    def serial():
        """"""
        return predict(scene, config, numpy.random.default_rng(0))

    def threaded():
        """"""
        with ThreadPoolExecutor(max_workers=4) as executor:
            return predict(scene, config, numpy.random.default_rng(0), executor.map)

    for func in (serial, threaded):
        t, prediction = benchmark_func(func, times=5)
        print(f"{func.__name__}: {t / 5:.3f} s per scene, {len(prediction.components)} components")


if __name__ == "__main__":
    gains_benchmark()
    predict_benchmark()
