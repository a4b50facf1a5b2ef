#!/usr/bin/env python3
# -*- coding: utf-8 -*-

__author__ = "Christian Heider Nielsen"
__doc__ = r"""

           Created on 18/10/2026
           """

import math

import numpy
import pytest

from highwaybma.inference import PredictionSet, WeightedTrajectory
from highwaybma.metrics import EvalRecord, ade, eval_record, horizon_summary, metric_table, qde, rmse

from .conftest import linear_track, make_scene


def _record(distances, weights=None, truth=(0.0, 0.0), vehicle_id=1):
    """Samples placed along +x at the given distances from the truth, at the single horizon 1 s."""
    distances = numpy.asarray(distances, dtype=float)
    if weights is None:
        weights = numpy.full(len(distances), 1.0 / len(distances))
    samples = numpy.asarray(truth) + numpy.stack([distances, numpy.zeros_like(distances)], axis=-1)
    return EvalRecord(vehicle_id, (1.0,), [truth], samples[:, None, :], weights)


def test_perfect_prediction_scores_zero():
    records = [_record([0.0, 0.0, 0.0])]
    assert rmse(records, 1.0) == 0.0
    assert ade(records, 1.0) == 0.0
    assert qde(records, 0.2, 1.0) == 0.0
    assert qde(records, 1.0, 1.0) == 0.0


def test_two_equal_weight_samples():
    records = [_record([3.0, 4.0])]
    assert rmse(records, 1.0) == pytest.approx(math.sqrt(12.5))
    assert ade(records, 1.0) == pytest.approx(3.5)


def test_rmse_averages_over_vehicles_before_the_root():
    records = [_record([3.0], vehicle_id=1), _record([4.0], vehicle_id=2)]
    assert rmse(records, 1.0) == pytest.approx(math.sqrt(12.5))


def test_qde_hundred_samples():
    assert qde([_record(numpy.arange(1.0, 101.0))], 0.2, 1.0) == pytest.approx(20.0)


def test_qde_includes_sample_at_exact_threshold():
    assert qde([_record([1.0, 2.0, 3.0, 4.0])], 0.5, 1.0) == 2.0
    assert qde([_record([5.0, 1.0], [0.25, 0.75])], 0.75, 1.0) == 1.0


def test_qde_is_nondecreasing_in_q():
    rng = numpy.random.default_rng(4)
    weights = rng.dirichlet(numpy.ones(40))
    records = [_record(rng.uniform(0.0, 30.0, 40), weights)]
    values = [qde(records, q, 1.0) for q in numpy.linspace(0.05, 1.0, 20)]
    assert numpy.all(numpy.diff(values) >= 0.0)
    assert values[-1] == pytest.approx(numpy.max(records[0].distances(1.0)))


def test_ade_never_exceeds_rmse():
    rng = numpy.random.default_rng(8)
    for _ in range(50):
        records = [_record(rng.exponential(5.0, 12), rng.dirichlet(numpy.ones(12))) for _ in range(3)]
        assert ade(records, 1.0) <= rmse(records, 1.0) + 1e-12


def test_metrics_are_translation_invariant():
    rng = numpy.random.default_rng(2)
    distances, weights = rng.uniform(0.0, 10.0, 16), rng.dirichlet(numpy.ones(16))
    here = [_record(distances, weights)]
    there = [_record(distances, weights, truth=(1234.5, -17.25))]
    for metric in (rmse, ade, lambda r, t: qde(r, 0.2, t)):
        assert metric(there, 1.0) == pytest.approx(metric(here, 1.0), abs=1e-9)


def test_duplicating_samples_with_halved_weights_changes_nothing():
    rng = numpy.random.default_rng(6)
    distances, weights = rng.uniform(0.0, 10.0, 10), rng.dirichlet(numpy.ones(10))
    single = [_record(distances, weights)]
    doubled = [_record(numpy.concatenate([distances, distances]), numpy.concatenate([weights, weights]) / 2)]
    assert rmse(doubled, 1.0) == pytest.approx(rmse(single, 1.0), abs=1e-12)
    assert ade(doubled, 1.0) == pytest.approx(ade(single, 1.0), abs=1e-12)
    assert qde(doubled, 0.2, 1.0) == pytest.approx(qde(single, 0.2, 1.0), abs=1e-12)


def test_metric_errors():
    with pytest.raises(ValueError):
        rmse([], 1.0)
    with pytest.raises(ValueError):
        ade([], 1.0)
    for q in (0.0, 1.5):
        with pytest.raises(ValueError):
            qde([_record([1.0])], q, 1.0)
    with pytest.raises(ValueError):
        _record([1.0]).distances(2.0)


def test_record_validates_weights():
    with pytest.raises(ValueError):
        _record([1.0, 2.0], [0.7, 0.7])
    with pytest.raises(ValueError):
        _record([1.0, 2.0], [1.5, -0.5])


@pytest.mark.parametrize(
    ["curve", "expected"],
    (([2.0] * 5, (2.0, 2.0)), ([1.0, 2.0, 3.0, 4.0, 5.0], (3.0, 5.0))),
    ids=["constant", "ramp"],
)
def test_horizon_summary(curve, expected):
    values = dict(zip((1.0, 2.0, 3.0, 4.0, 5.0), curve))
    assert horizon_summary(values) == pytest.approx(expected)


def test_horizon_summary_missing_horizon():
    with pytest.raises(ValueError):
        horizon_summary({1.0: 1.0, 2.0: 2.0, 3.0: 3.0, 4.0: 4.0})


def test_horizon_summary_without_horizons():
    with pytest.raises(ValueError):
        horizon_summary({}, ())


def _prediction(scene, offsets_m):
    steps = scene.T - scene.n
    samples = []
    for offset in offsets_m:
        positions = numpy.array([scene.target.position(t) for t in range(scene.n + 1, scene.T + 1)])
        samples.append(WeightedTrajectory(1.0 / len(offsets_m), positions + (offset, 0.0)))
    assert all(sample.positions.shape == (steps, 2) for sample in samples)
    return PredictionSet(scene.scene_id, scene.dt, scene.n, scene.T, (), tuple(samples))


def test_eval_record_reads_the_true_future(free_scene):
    record = eval_record(_prediction(free_scene, [0.0, 3.0]), free_scene)
    assert record.horizons_s == (1.0, 2.0, 3.0, 4.0, 5.0)
    # target at 20 m/s from x=0, observation ends at timestep 30
    assert record.truth[:, 0] == pytest.approx([78.0, 98.0, 118.0, 138.0, 158.0])
    assert ade([record], 5.0) == pytest.approx(1.5)


def test_eval_record_rejects_foreign_scene(free_scene):
    other = make_scene(linear_track(1, (0.0, 2.0), (20.0, 0.0), 80, observed=range(1, 31)), scene_id="other")
    with pytest.raises(ValueError):
        eval_record(_prediction(free_scene, [0.0]), other)


def test_eval_record_rejects_horizon_past_the_window(free_scene):
    with pytest.raises(ValueError):
        eval_record(_prediction(free_scene, [0.0]), free_scene, (1.0, 6.0))


def test_metric_table(free_scene):
    records = [eval_record(_prediction(free_scene, [3.0, 4.0]), free_scene)]
    table = metric_table(records, "synthetic", "birdseye")
    assert list(table.columns) == ["dataset", "view", "metric", "horizon_s", "value"]
    assert len(table) == 21
    assert set(table["metric"]) == {"ade", "rmse", "qde"}
    rows = table.set_index(["metric", "horizon_s"])["value"]
    assert rows[("ade", "average")] == pytest.approx(3.5)
    assert rows[("rmse", "final")] == pytest.approx(math.sqrt(12.5))
    assert rows[("qde", "3")] == pytest.approx(3.0)
