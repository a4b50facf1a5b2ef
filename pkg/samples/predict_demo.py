#!/usr/bin/env python3
# -*- coding: utf-8 -*-

__author__ = "Christian Heider Nielsen"
__doc__ = r"""

           Created on 18/10/2026
           """

import numpy

from highwaybma import RunConfig, SyntheticScenario, predict, simulate_scene

if __name__ == "__main__":

    def main():
        """"""
        scenario = SyntheticScenario(
            start_lane=0, target_lane=1, merge_s=6.0, leader_gap=40.0, leader_speed=22.0
        )
        scene = simulate_scene(scenario, numpy.random.default_rng(0), "demo")
        prediction = predict(scene, RunConfig(n_samples=8), numpy.random.default_rng(0))

        ranked = sorted(prediction.components, key=lambda c: c.weight, reverse=True)
        for component in ranked[:5]:
            print(
                f"lane {component.pair.lane} leader {component.pair.leader} "
                f"k={component.merge_seconds:4.1f}s weight={component.weight:.3f}"
            )

        final = numpy.array([sample.positions[-1] for sample in prediction.samples])
        weights = numpy.array([sample.weight for sample in prediction.samples])
        print(f"expected position after 5 s: {weights @ final}")
        print(f"true position after 5 s: {scene.target.position(scene.T)}")

    main()
