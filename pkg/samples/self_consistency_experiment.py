# To add a new cell, type '# %%'
# To add a new markdown cell, type '# %% [markdown]'
# %% [markdown]
# Christian Heider Nielsen
# Created on 18/10/2026
#
# Scenes simulated from a known (lane, leader, merge duration) component: how often does the posterior put
# most of its weight on the right lane, and how often is the heaviest merge duration within one grid step
# of the true one?

# %%
import time

import numpy
import pandas

from highwaybma import RunConfig, SyntheticScenario, predict, simulate_scene
from highwaybma.utilities import scene_rng, setup_logging

setup_logging(0)
TRIALS = 200
config = RunConfig(n_samples=1, rollout_noise=False)
grid = numpy.array(config.merge_grid_seconds())
rng = numpy.random.default_rng(2026)

# %%
rows = []
start = time.perf_counter()
for trial in range(TRIALS):
    target_lane = int(rng.integers(0, 2))
    merge_s = float(rng.choice(grid[grid >= 4.0])) if target_lane == 1 else 0.0
    leader_gap = float(rng.uniform(20.0, 45.0)) if rng.random() < 0.5 else None
    scenario = SyntheticScenario(
        target_lane=target_lane,
        merge_s=merge_s,
        leader_gap=leader_gap,
        leader_speed=float(rng.uniform(20, 26)),
    )
    scene = simulate_scene(scenario, scene_rng(config.seed, trial), f"trial-{trial}")
    prediction = predict(scene, config, scene_rng(config.seed, trial))

    lane_weight = sum(c.weight for c in prediction.components if c.pair.lane == target_lane)
    in_lane = [c for c in prediction.components if c.pair.lane == target_lane]
    by_k = pandas.Series([c.weight for c in in_lane], index=[c.merge_seconds for c in in_lane])
    best_k = by_k.groupby(level=0).sum().idxmax()
    rows.append(
        {
            "trial": trial,
            "target_lane": target_lane,
            "merge_s": merge_s,
            "leader": leader_gap is not None,
            "lane_weight": lane_weight,
            "best_k": best_k,
        }
    )
elapsed = time.perf_counter() - start

# %%
results = pandas.DataFrame(rows)
lane_rate = float((results["lane_weight"] > 0.5).mean())
k_rate = float(((results["best_k"] - results["merge_s"]).abs() <= config.merge_step_s + 1e-9).mean())
print(f"{TRIALS} trials in {elapsed:.1f} s")
print(f"lane weight > 0.5: {lane_rate:.1%} (expected at least 90%)")
print(f"merge duration within one grid step: {k_rate:.1%} (expected at least 70%)")
print(results.groupby(["target_lane", "leader"])[["lane_weight"]].mean())
