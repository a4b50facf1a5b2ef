#!/usr/bin/env python3
# -*- coding: utf-8 -*-

__author__ = "Christian Heider Nielsen"
__doc__ = r"""
Probabilistic error metrics over weighted trajectory samples, evaluated at whole-second horizons.

           Created on 18/10/2026
           """

__all__ = [
    "EvalRecord",
    "METRICS",
    "REPORT_COLUMNS",
    "rmse",
    "ade",
    "qde",
    "horizon_summary",
    "eval_record",
    "metric_table",
]

import math
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy
import pandas

from highwaybma.inference import PredictionSet
from highwaybma.scene import Scene

METRICS = ("ade", "rmse", "qde")
REPORT_COLUMNS = ("dataset", "view", "metric", "horizon_s", "value")
DEFAULT_HORIZONS = (1.0, 2.0, 3.0, 4.0, 5.0)
WEIGHT_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class EvalRecord:
    """
    One predicted vehicle: true positions at each evaluated horizon and the weighted samples there.

    :param vehicle_id:
    :param horizons_s: evaluated horizons, seconds after the end of the observation window
    :param truth: shape (H, 2)
    :param samples: shape (S, H, 2)
    :param weights: shape (S,), summing to one"""

    vehicle_id: int
    horizons_s: Tuple[float, ...]
    truth: numpy.ndarray
    samples: numpy.ndarray
    weights: numpy.ndarray

    def __post_init__(self):
        object.__setattr__(self, "horizons_s", tuple(float(h) for h in self.horizons_s))
        object.__setattr__(self, "truth", numpy.asarray(self.truth, dtype=float).reshape(-1, 2))
        samples = numpy.asarray(self.samples, dtype=float).reshape(-1, len(self.truth), 2)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "weights", numpy.asarray(self.weights, dtype=float).reshape(-1))
        if len(self.truth) != len(self.horizons_s):
            raise ValueError(
                f"Vehicle {self.vehicle_id}: {len(self.horizons_s)} horizons, {len(self.truth)} truths"
            )
        if len(self.samples) != len(self.weights) or not len(self.weights):
            raise ValueError(f"Vehicle {self.vehicle_id}: need one weight per sample and at least one sample")
        if numpy.any(self.weights < 0) or abs(math.fsum(self.weights) - 1.0) > WEIGHT_TOLERANCE:
            raise ValueError(f"Vehicle {self.vehicle_id}: weights must be non-negative and sum to 1")

    def distances(self, horizon_s: float) -> numpy.ndarray:
        """Euclidean distance of every sample to the truth at the horizon."""
        try:
            index = self.horizons_s.index(float(horizon_s))
        except ValueError:
            raise ValueError(f"Vehicle {self.vehicle_id}: horizon {horizon_s} s not evaluated") from None
        return numpy.linalg.norm(self.samples[:, index] - self.truth[index], axis=-1)


def _check(records: Sequence[EvalRecord]) -> None:
    if not records:
        raise ValueError("No records to evaluate")


def _vehicle_mean(values) -> float:
    return math.fsum(values) / len(values)


def rmse(records: Sequence[EvalRecord], t: float) -> float:
    """
    Square root of the vehicle-averaged expected squared error at horizon t."""
    _check(records)
    return math.sqrt(
        _vehicle_mean([math.fsum(r.weights * numpy.square(r.distances(t))) for r in records])
    )


def ade(records: Sequence[EvalRecord], t: float) -> float:
    """
    Vehicle-averaged expected distance at horizon t."""
    _check(records)
    return _vehicle_mean([math.fsum(r.weights * r.distances(t)) for r in records])


def _quantile_distance(distances: numpy.ndarray, weights: numpy.ndarray, q: float) -> float:
    order = numpy.argsort(distances, kind="stable")
    cumulative = numpy.cumsum(weights[order])
    index = int(numpy.searchsorted(cumulative, q - 1e-12, side="left"))
    return float(distances[order][min(index, len(order) - 1)])


def qde(records: Sequence[EvalRecord], q: float, t: float) -> float:
    """
    Vehicle-averaged smallest radius around the truth holding at least a fraction q of the probability mass.

    :param records:
    :param q: mass fraction in (0, 1]
    :param t: horizon, seconds"""
    if not 0 < q <= 1:
        raise ValueError(f"Quantile must lie in (0, 1], got {q}")
    _check(records)
    return _vehicle_mean([_quantile_distance(r.distances(t), r.weights, q) for r in records])


def horizon_summary(
    values: Dict[float, float], horizons: Sequence[float] = DEFAULT_HORIZONS
) -> Tuple[float, float]:
    """
    (average over the horizons, value at the last horizon) of one metric curve."""
    if not horizons:
        raise ValueError("A metric curve needs at least one horizon")
    missing = [h for h in horizons if float(h) not in {float(k) for k in values}]
    if missing:
        raise ValueError(f"Missing horizons {missing}")
    lookup = {float(k): v for k, v in values.items()}
    curve = [lookup[float(h)] for h in horizons]
    return math.fsum(curve) / len(curve), curve[-1]


def eval_record(
    prediction: PredictionSet, scene: Scene, horizons_s: Sequence[float] = DEFAULT_HORIZONS
) -> EvalRecord:
    """
    Pair a scene's predicted samples with the target's true future positions."""
    if prediction.scene_id != scene.scene_id:
        raise ValueError(f"Prediction {prediction.scene_id} does not belong to scene {scene.scene_id}")
    offsets = [int(round(h / scene.dt)) for h in horizons_s]
    if any(not 1 <= offset <= scene.T - scene.n for offset in offsets):
        raise ValueError(f"Scene {scene.scene_id}: horizons {tuple(horizons_s)} exceed the prediction window")
    truth = numpy.array([scene.target.position(scene.n + offset) for offset in offsets])
    if not numpy.all(numpy.isfinite(truth)):
        raise ValueError(f"Scene {scene.scene_id}: target future missing at an evaluated horizon")
    samples = numpy.array(
        [[sample.positions[offset - 1] for offset in offsets] for sample in prediction.samples]
    )
    weights = numpy.array([sample.weight for sample in prediction.samples])
    weights = weights / math.fsum(weights)
    return EvalRecord(scene.target.vehicle_id, tuple(horizons_s), truth, samples, weights)


def metric_table(
    records: Sequence[EvalRecord],
    dataset: str,
    view: str,
    q: float = 0.2,
    horizons: Sequence[float] = DEFAULT_HORIZONS,
) -> pandas.DataFrame:
    """
    Report rows (dataset, view, metric, horizon_s, value): one per metric and horizon, followed by the
    "average" and "final" summary rows of each metric."""
    functions = {"ade": ade, "rmse": rmse, "qde": lambda r, t: qde(r, q, t)}
    rows = []
    for metric in METRICS:
        curve = {float(h): functions[metric](records, h) for h in horizons}
        rows.extend((dataset, view, metric, f"{h:g}", value) for h, value in curve.items())
        average, final = horizon_summary(curve, horizons)
        rows.append((dataset, view, metric, "average", average))
        rows.append((dataset, view, metric, "final", final))
    return pandas.DataFrame(rows, columns=REPORT_COLUMNS)
