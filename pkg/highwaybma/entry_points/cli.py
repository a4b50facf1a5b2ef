#!/usr/bin/env python3
# -*- coding: utf-8 -*-

__author__ = "Christian Heider Nielsen"
__doc__ = r"""Ingest recordings into scene archives, predict, evaluate and emit plot data"""

__all__ = ["main", "build_parser", "cmd_ingest", "cmd_predict", "cmd_evaluate", "cmd_plotdata"]

import argparse
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

import numpy
import pandas

from highwaybma.config import DATASETS, RunConfig, VIEWS, load_config
from highwaybma.data_io import (
    FEET_TO_METERS,
    Recording,
    extract_windows,
    load_highd,
    load_ngsim,
    read_scene_archive,
    resample_recording,
    write_scene_archive,
)
from highwaybma.errors import DataFormatError, HighwayBMAError, InputError, NumericalError
from highwaybma.inference import PredictionSet, predict
from highwaybma.metrics import REPORT_COLUMNS, eval_record, metric_table
from highwaybma.scene import Scene
from highwaybma.sensing import driver_view
from highwaybma.synthetic import scenarios_from_document, simulate_scene
from highwaybma.utilities import append_json_line, ensure_existence, read_json, scene_rng, setup_logging
from highwaybma.utilities.path_utilities import sidecar_path, write_json

logger = logging.getLogger(__name__)

USAGE_EXIT_CODE = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        """Usage errors are input errors."""
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT_CODE, f"{self.prog}: error: {message}\n")


def _common_arguments() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="RunConfig JSON file")
    common.add_argument("--seed", type=int, default=None, help="Master seed (default: from config)")
    common.add_argument("--verbose", "-v", action="count", default=0, help="Repeat for more detail")
    common.add_argument("--no-log-file", action="store_true", help="Log to stderr only")
    return common


def build_parser() -> argparse.ArgumentParser:
    """"""
    common = _common_arguments()
    parser = _Parser(
        prog="highwaybma", description="Highway trajectory prediction by Bayesian model averaging"
    )
    commands = parser.add_subparsers(dest="command", parser_class=_Parser)
    commands.required = True

    ingest = commands.add_parser("ingest", parents=[common], help="Recording(s) to a scene archive")
    ingest.add_argument("input", type=str, help="NGSIM CSV, highD tracks CSV or synthetic scenario JSON")
    ingest.add_argument("--dataset", choices=DATASETS, required=True)
    ingest.add_argument("--meta", type=str, default=None, help="highD recordingMeta CSV (default: derived)")
    ingest.add_argument("--unit", choices=("feet", "meters"), default="feet", help="NGSIM position unit")
    ingest.add_argument(
        "--view", choices=VIEWS, default=None, help="driver skips targets with observation gaps"
    )
    ingest.add_argument("--output", "-o", type=str, required=True)
    ingest.set_defaults(func=cmd_ingest)

    predict_parser = commands.add_parser("predict", parents=[common], help="Scene archive to predictions")
    predict_parser.add_argument("archive", type=str)
    predict_parser.add_argument("--output", "-o", type=str, required=True)
    predict_parser.add_argument("--view", choices=VIEWS, default=None)
    predict_parser.add_argument("--no-interaction", action="store_true", help="Ignore surrounding vehicles")
    predict_parser.add_argument("--samples", type=int, default=None, help="Samples per component")
    predict_parser.add_argument("--workers", type=int, default=None)
    predict_parser.add_argument(
        "--dataset", choices=DATASETS, default=None, help="Selects dataset noise levels"
    )
    predict_parser.set_defaults(func=cmd_predict)

    evaluate = commands.add_parser("evaluate", parents=[common], help="Predictions against truth to metrics")
    evaluate.add_argument("predictions", type=str)
    evaluate.add_argument("truth", type=str, help="Scene archive holding the ground truth")
    evaluate.add_argument("--output", "-o", type=str, required=True)
    evaluate.add_argument("--dataset", type=str, default=None, help="Dataset label (default: from config)")
    evaluate.set_defaults(func=cmd_evaluate)

    plotdata = commands.add_parser(
        "plotdata", parents=[common], help="Metric CSV or predictions to plot tables"
    )
    plotdata.add_argument("input", type=str)
    plotdata.add_argument("--output", "-o", type=str, required=True)
    plotdata.set_defaults(func=cmd_plotdata)
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    return load_config(args.config).updated(
        seed=args.seed,
        view=getattr(args, "view", None),
        n_samples=getattr(args, "samples", None),
        workers=getattr(args, "workers", None),
        no_interaction=True if getattr(args, "no_interaction", False) else None,
        dataset=getattr(args, "dataset", None) if getattr(args, "dataset", None) in DATASETS else None,
    )


def _highd_meta_path(tracks_path: Path) -> Path:
    if "_tracks" not in tracks_path.stem:
        raise InputError(f"Cannot derive the recordingMeta file from {tracks_path}, pass --meta")
    return tracks_path.with_name(tracks_path.name.replace("_tracks", "_recordingMeta"))


def cmd_ingest(args: argparse.Namespace, config: RunConfig) -> int:
    """
    Write the scene archive and a manifest of what was read and converted."""
    source = Path(args.input)
    manifest = {
        "dataset": args.dataset,
        "input": source.name,
        "model_rate_hz": 1.0 / config.dt,
        "window": {"obs_s": config.obs_s, "pred_s": config.pred_s, "stride_s": config.stride_s},
        "view": config.view,
    }
    if args.dataset == "synthetic":
        scenarios = scenarios_from_document(read_json(source))
        scenes = [
            simulate_scene(scenario, scene_rng(config.seed, index), f"{source.stem}-{index}")
            for index, scenario in enumerate(scenarios)
        ]
        manifest.update(frame_rate_hz=1.0 / config.dt, resampled=False, unit="meters", unit_scale=1.0)
        manifest.update(vehicles=sum(1 + len(scene.others) for scene in scenes), seed=config.seed)
    else:
        if args.dataset == "ngsim":
            meta, tracks = load_ngsim(source, unit=args.unit)
        else:
            meta_path = Path(args.meta) if args.meta else _highd_meta_path(source)
            meta, tracks = load_highd(source, meta_path)
        recording = Recording(meta, tuple(tracks))
        resampled = not math.isclose(meta.frame_rate, 1.0 / config.dt)
        if resampled:
            recording = resample_recording(recording, 1.0 / config.dt)
        scenes = extract_windows(
            recording,
            config.obs_s,
            config.pred_s,
            config.stride_s,
            full_observation=config.view == "driver",
        )
        manifest.update(
            frame_rate_hz=meta.frame_rate,
            resampled=resampled,
            unit=meta.unit,
            unit_scale=FEET_TO_METERS if meta.unit == "feet" else 1.0,
            vehicles=len(tracks),
            lanes=len(meta.lanes),
        )
    manifest["scenes"] = len(scenes)
    write_scene_archive(args.output, scenes, manifest)
    logger.info(f"Wrote {len(scenes)} scenes to {args.output}")
    return 0


def _predict_scene(task) -> dict:
    index, scene, config = task
    try:
        if config.view == "driver":
            scene = driver_view(scene, scene.target.vehicle_id, config.sensor)
        return {"prediction": predict(scene, config, scene_rng(config.seed, index)).to_dict()}
    except HighwayBMAError as e:
        return {"failure": _failure(index, scene, e, e.exit_code)}
    except numpy.linalg.LinAlgError as e:
        return {"failure": _failure(index, scene, e, NumericalError.exit_code)}
    except (ValueError, ArithmeticError, KeyError) as e:
        return {"failure": _failure(index, scene, e, InputError.exit_code)}


def _failure(index: int, scene: Scene, error: Exception, exit_code: int) -> dict:
    return {
        "index": index,
        "scene_id": scene.scene_id,
        "error": type(error).__name__,
        "message": str(error),
        "exit_code": exit_code,
    }


def cmd_predict(args: argparse.Namespace, config: RunConfig) -> int:
    """
    Predict every scene of the archive. A failing scene is logged, recorded in the ".failures.jsonl" sidecar
    and skipped; the exit code reports the worst failure once the archive is written."""
    scenes = read_scene_archive(args.archive)
    tasks = [(index, scene, config) for index, scene in enumerate(scenes)]
    if config.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as executor:
            outcomes = list(executor.map(_predict_scene, tasks))
    else:
        outcomes = [_predict_scene(task) for task in tasks]

    output = ensure_existence(args.output, declare_file=True)
    failures_path = sidecar_path(output, "failures", ".jsonl")
    if failures_path.exists():
        failures_path.unlink()
    predictions, exit_code = [], 0
    for outcome in outcomes:
        if "failure" in outcome:
            failure = outcome["failure"]
            logger.warning(f"Scene {failure['scene_id']} failed: {failure['error']}: {failure['message']}")
            append_json_line(failures_path, failure)
            exit_code = max(exit_code, failure["exit_code"])
        else:
            predictions.append(outcome["prediction"])
    write_json(output, {"view": config.view, "config": config.to_dict(), "predictions": predictions})
    logger.info(f"Predicted {len(predictions)}/{len(scenes)} scenes into {output}")
    return exit_code


def _read_predictions(path) -> dict:
    document = read_json(path)
    if not isinstance(document, dict) or not isinstance(document.get("predictions"), list):
        raise DataFormatError('Prediction archive must hold a "predictions" list', source=str(path))
    return document


def cmd_evaluate(args: argparse.Namespace, config: RunConfig) -> int:
    """
    Metric CSV of the predictions against the targets' true futures, per whole-second horizon plus the
    average and final rows."""
    document = _read_predictions(args.predictions)
    truth = {scene.scene_id: scene for scene in read_scene_archive(args.truth)}
    predictions = [PredictionSet.from_dict(entry) for entry in document["predictions"]]
    unknown = [p.scene_id for p in predictions if p.scene_id not in truth]
    if unknown:
        raise InputError(f"Predictions for scenes missing from the truth archive: {unknown}")
    if not predictions:
        raise InputError(f"No predictions to evaluate in {args.predictions}")
    unpredicted = sorted(set(truth) - {p.scene_id for p in predictions})
    if unpredicted:
        logger.warning(f"{len(unpredicted)} truth scenes have no prediction and are left out")

    windows = {round((p.T - p.n) * p.dt, 9) for p in predictions}
    horizons = tuple(float(h) for h in range(1, int(math.floor(min(windows) + 1e-9)) + 1))
    if not horizons:
        raise InputError(f"Prediction windows of {min(windows)} s are shorter than the first 1 s horizon")
    records = [eval_record(p, truth[p.scene_id], horizons) for p in predictions]
    dataset = args.dataset or config.dataset
    view = document.get("view", config.view)
    table = metric_table(records, dataset, view, config.qde_quantile, horizons)
    table.to_csv(ensure_existence(args.output, declare_file=True), index=False)
    logger.info(f"Evaluated {len(records)} scenes into {args.output}")
    return 0


def _metric_curves(path: Path) -> pandas.DataFrame:
    try:
        table = pandas.read_csv(path, dtype={"horizon_s": str})
    except pandas.errors.EmptyDataError:
        return pandas.DataFrame(columns=["dataset", "view", "horizon_s"])
    missing = [column for column in REPORT_COLUMNS if column not in table.columns]
    if missing:
        raise DataFormatError("Missing required column", source=str(path), column=missing[0])
    curves = table[pandas.to_numeric(table["horizon_s"], errors="coerce").notna()]
    curves = curves.assign(horizon_s=curves["horizon_s"].astype(float))
    wide = curves.pivot_table(index=["dataset", "view", "horizon_s"], columns="metric", values="value")
    return wide.reset_index().sort_values(["dataset", "view", "horizon_s"])


def _sample_points(path: Path) -> pandas.DataFrame:
    document = _read_predictions(path)
    rows = []
    for entry in document["predictions"]:
        for index, sample in enumerate(entry["samples"]):
            component = sample.get("component", -1)
            rows.extend(
                (entry["scene_id"], index, component, sample["weight"], p["t"], p["x"], p["y"])
                for p in sample["points"]
            )
    return pandas.DataFrame(rows, columns=["scene_id", "sample", "component", "weight", "t", "x", "y"])


def cmd_plotdata(args: argparse.Namespace, config: RunConfig) -> int:
    """
    Flat CSV for plotting: metric-vs-horizon curves, one column per metric, from a metric CSV; weighted
    sample points from a prediction archive."""
    source = Path(args.input)
    table = _metric_curves(source) if source.suffix.lower() == ".csv" else _sample_points(source)
    table.to_csv(ensure_existence(args.output, declare_file=True), index=False)
    logger.info(f"Wrote {len(table)} plot rows to {args.output}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    :param argv: arguments without the program name, defaults to sys.argv[1:]
    :return: 0 on success, 1 on input errors, 2 on numerical failures"""
    args = build_parser().parse_args(argv)
    log_dir = None
    if not args.no_log_file:
        from highwaybma import PROJECT_APP_PATH

        log_dir = PROJECT_APP_PATH.user_log
    setup_logging(args.verbose, log_dir)
    try:
        return args.func(args, _config(args))
    except HighwayBMAError as e:
        logger.error(str(e))
        return e.exit_code
    except numpy.linalg.LinAlgError as e:
        logger.error(f"Numerical failure: {e}")
        return NumericalError.exit_code


if __name__ == "__main__":
    sys.exit(main())
