#!/usr/bin/env python3
# -*- coding: utf-8 -*-

__author__ = "Christian Heider Nielsen"
__doc__ = r"""
Recording ingestion: NGSIM and highD CSV parsing into meters and lane-aligned (longitudinal, lateral)
coordinates, resampling to the model rate, cutting observation/prediction windows into scenes, and the
scene archive format.

           Created on 18/10/2026
           """

__all__ = [
    "FEET_TO_METERS",
    "RecordingMeta",
    "RecordingTrack",
    "Recording",
    "load_ngsim",
    "load_highd",
    "resample",
    "resample_recording",
    "extract_windows",
    "write_scene_archive",
    "read_scene_archive",
]

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy
import pandas

from highwaybma.errors import DataFormatError, HighwayBMAError
from highwaybma.scene import Lane, Scene, Track, lanes_from_boundaries
from highwaybma.utilities.path_utilities import read_json, sidecar_path, write_json

logger = logging.getLogger(__name__)

FEET_TO_METERS = 0.3048
NGSIM_FRAME_RATE = 10.0
NGSIM_COLUMNS = ("Vehicle_ID", "Frame_ID", "Local_X", "Local_Y", "Lane_ID")
HIGHD_TRACK_COLUMNS = ("id", "frame", "x", "y", "width", "height", "laneId")
HIGHD_META_COLUMNS = ("frameRate", "upperLaneMarkings", "lowerLaneMarkings")
SOURCES = ("ngsim", "highd", "synthetic")
UNITS = {"feet": FEET_TO_METERS, "meters": 1.0}


@dataclass(frozen=True)
class RecordingMeta:
    """
    :param source: ngsim, highd or synthetic
    :param frame_rate: Hz
    :param unit: unit of the raw file, positions are always stored in meters
    :param lanes: lane geometry in the converted coordinates
    :param recording_id: used to build scene ids"""

    source: str
    frame_rate: float
    unit: str = "meters"
    lanes: Tuple[Lane, ...] = ()
    recording_id: str = "recording"

    def __post_init__(self):
        object.__setattr__(self, "lanes", tuple(self.lanes))
        if self.source not in SOURCES:
            raise ValueError(f"Unknown source {self.source!r}, expected one of {SOURCES}")
        if not self.frame_rate > 0:
            raise ValueError(f"Frame rate must be positive, got {self.frame_rate}")
        if self.unit not in UNITS:
            raise ValueError(f"Unknown unit {self.unit!r}, expected one of {tuple(UNITS)}")


@dataclass(frozen=True, eq=False)
class RecordingTrack:
    """
    One vehicle over a whole recording: strictly increasing times in seconds and (longitudinal, lateral)
    positions in meters."""

    vehicle_id: int
    times: numpy.ndarray
    positions: numpy.ndarray

    def __post_init__(self):
        times = numpy.asarray(self.times, dtype=float).reshape(-1)
        positions = numpy.asarray(self.positions, dtype=float).reshape(-1, 2)
        if len(times) != len(positions):
            raise ValueError(f"Vehicle {self.vehicle_id}: {len(times)} times for {len(positions)} positions")
        if numpy.any(numpy.diff(times) <= 0):
            raise ValueError(f"Vehicle {self.vehicle_id}: times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "positions", positions)

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True, eq=False)
class Recording:
    meta: RecordingMeta
    tracks: Tuple[RecordingTrack, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "tracks", tuple(sorted(self.tracks, key=lambda track: track.vehicle_id)))


def _read_csv(path: Union[str, Path], required: Sequence[str]) -> pandas.DataFrame:
    try:
        frame = pandas.read_csv(path, skipinitialspace=True)
    except pandas.errors.EmptyDataError:
        return pandas.DataFrame(columns=list(required))
    except (OSError, pandas.errors.ParserError) as e:
        raise DataFormatError(f"Cannot parse CSV: {e}", source=str(path)) from e
    frame.columns = [str(column).strip() for column in frame.columns]
    for column in required:
        if column not in frame.columns:
            raise DataFormatError("Missing required column", source=str(path), column=column)
    for column in required:
        try:
            frame[column] = pandas.to_numeric(frame[column])
        except (TypeError, ValueError):
            frame[column] = frame[column].astype(str)
    return frame


def _tracks_from_frame(
    frame: pandas.DataFrame, id_column: str, frame_column: str, frame_rate: float, path: Union[str, Path]
) -> List[RecordingTrack]:
    """Group rows into per-vehicle tracks; expects "lon" and "lat" columns already in meters."""
    rows = frame.assign(_row=numpy.arange(len(frame)) + 2)
    duplicated = rows.duplicated(subset=[id_column, frame_column], keep="first")
    if duplicated.any():
        first = rows[duplicated].iloc[0]
        raise DataFormatError(
            f"Duplicate row for vehicle {first[id_column]} at frame {first[frame_column]}",
            source=str(path),
            row=int(first["_row"]),
        )
    if not numpy.all(numpy.isfinite(rows[["lon", "lat"]].to_numpy(dtype=float))):
        bad = rows[~numpy.isfinite(rows[["lon", "lat"]].to_numpy(dtype=float)).all(axis=1)].iloc[0]
        raise DataFormatError("Non-finite position", source=str(path), row=int(bad["_row"]))

    tracks = []
    for vehicle_id, group in rows.groupby(id_column, sort=True):
        frames = group[frame_column].to_numpy()
        decreasing = numpy.flatnonzero(numpy.diff(frames) <= 0)
        if len(decreasing):
            raise DataFormatError(
                f"Frames of vehicle {vehicle_id} are not increasing",
                source=str(path),
                row=int(group["_row"].iloc[decreasing[0] + 1]),
                column=frame_column,
            )
        tracks.append(
            RecordingTrack(int(vehicle_id), frames / frame_rate, group[["lon", "lat"]].to_numpy(dtype=float))
        )
    return tracks


def _lanes_from_ids(frame: pandas.DataFrame, lane_column: str) -> List[Lane]:
    """
    Lanes from per-lane-id lateral positions: centers at the medians, boundaries halfway between neighbouring
    centers, the outer boundaries at the observed extremes."""
    if frame.empty:
        return []
    stats = frame.groupby(lane_column)["lat"].agg(["median", "min", "max"]).sort_values("median")
    centers = stats["median"].to_numpy(dtype=float)
    if numpy.any(numpy.diff(centers) <= 0):
        raise DataFormatError(f"Lanes {list(stats.index)} share a lateral center", column=lane_column)
    inner = list(0.5 * (centers[1:] + centers[:-1]))
    spacing = float(numpy.min(numpy.diff(centers))) if len(centers) > 1 else 1.0
    lower = min(float(stats["min"].iloc[0]), centers[0] - 0.5 * spacing)
    upper = max(float(stats["max"].iloc[-1]), centers[-1] + 0.5 * spacing)
    boundaries = [lower] + inner + [math.nextafter(upper, math.inf)]
    lanes = []
    ids = [int(lane_id) for lane_id in stats.index]
    for position, (lane_id, center) in enumerate(zip(ids, centers)):
        adjacent = {ids[p] for p in (position - 1, position + 1) if 0 <= p < len(ids)}
        lanes.append(Lane(lane_id, boundaries[position], boundaries[position + 1], float(center), adjacent))
    return lanes


def load_ngsim(
    path: Union[str, Path],
    *,
    unit: str = "feet",
    longitudinal: str = "Local_Y",
    lateral: str = "Local_X",
    recording_id: str = None,
) -> Tuple[RecordingMeta, List[RecordingTrack]]:
    """
    Parse an NGSIM trajectory CSV.

    :param path:
    :param unit: unit of the position columns, feet for the published exports
    :param longitudinal: column along the direction of travel
    :param lateral: column across the lanes
    :param recording_id: defaults to the file stem
    :return: meta (10 Hz, lanes from Lane_ID) and tracks in meters"""
    if unit not in UNITS:
        raise ValueError(f"Unknown unit {unit!r}")
    frame = _read_csv(path, NGSIM_COLUMNS + tuple({longitudinal, lateral} - set(NGSIM_COLUMNS)))
    frame = frame.assign(
        lon=frame[longitudinal].astype(float) * UNITS[unit], lat=frame[lateral].astype(float) * UNITS[unit]
    )
    tracks = _tracks_from_frame(frame, "Vehicle_ID", "Frame_ID", NGSIM_FRAME_RATE, path)
    meta = RecordingMeta(
        source="ngsim",
        frame_rate=NGSIM_FRAME_RATE,
        unit=unit,
        lanes=tuple(_lanes_from_ids(frame, "Lane_ID")),
        recording_id=recording_id or Path(path).stem,
    )
    logger.info(f"NGSIM {path}: {len(tracks)} vehicles, {len(meta.lanes)} lanes")
    return meta, tracks


def _markings(value, path: Union[str, Path], column: str) -> List[float]:
    try:
        markings = [float(m) for m in str(value).split(";") if m.strip()]
    except ValueError as e:
        raise DataFormatError(f"Unreadable lane markings {value!r}", source=str(path), column=column) from e
    if len(markings) < 2:
        raise DataFormatError("Need at least two lane markings", source=str(path), column=column)
    return sorted(markings)


def load_highd(
    tracks_path: Union[str, Path], meta_path: Union[str, Path], *, recording_id: str = None
) -> Tuple[RecordingMeta, List[RecordingTrack]]:
    """
    Parse a highD recording. Positions are bounding-box centers. Vehicles on the upper carriageway travel
    towards decreasing x, so their coordinates are mirrored (x -> -x, y -> -y) and longitudinal positions
    increase along travel on both carriageways. Lanes keep highD's laneId numbering.

    :param tracks_path: XX_tracks.csv
    :param meta_path: XX_recordingMeta.csv
    :param recording_id: defaults to the tracks file stem"""
    meta_frame = _read_csv(meta_path, HIGHD_META_COLUMNS)
    if len(meta_frame) != 1:
        raise DataFormatError(f"Expected one recording row, got {len(meta_frame)}", source=str(meta_path))
    frame_rate = float(meta_frame["frameRate"].iloc[0])
    upper = _markings(meta_frame["upperLaneMarkings"].iloc[0], meta_path, "upperLaneMarkings")
    lower = _markings(meta_frame["lowerLaneMarkings"].iloc[0], meta_path, "lowerLaneMarkings")
    # mirrored upper lanes come out median first; highD numbers them from the top edge, starting at 2
    top = len(upper)
    upper_lanes = [
        Lane(top - lane.index, lane.lower, lane.upper, lane.center, {top - a for a in lane.adjacent})
        for lane in lanes_from_boundaries([-m for m in reversed(upper)])
    ]
    lower_lanes = lanes_from_boundaries(lower, first_index=len(upper) + 2)

    frame = _read_csv(tracks_path, HIGHD_TRACK_COLUMNS)
    x = frame["x"].astype(float) + 0.5 * frame["width"].astype(float)
    y = frame["y"].astype(float) + 0.5 * frame["height"].astype(float)
    on_upper = (y >= upper[0]) & (y <= upper[-1])
    on_lower = (y >= lower[0]) & (y <= lower[-1])
    stray = ~(on_upper | on_lower)
    if stray.any():
        index = int(numpy.flatnonzero(stray.to_numpy())[0])
        raise DataFormatError(
            f"Vehicle {frame['id'].iloc[index]} at y={y.iloc[index]:.2f} lies outside the "
            "recording's carriageways",
            source=str(tracks_path),
            row=index + 2,
            column="y",
        )
    frame = frame.assign(lon=numpy.where(on_upper, -x, x), lat=numpy.where(on_upper, -y, y))
    tracks = _tracks_from_frame(frame, "id", "frame", frame_rate, tracks_path)
    meta = RecordingMeta(
        source="highd",
        frame_rate=frame_rate,
        unit="meters",
        lanes=tuple(sorted(upper_lanes + lower_lanes, key=lambda lane: lane.index)),
        recording_id=recording_id or Path(tracks_path).stem,
    )
    logger.info(f"highD {tracks_path}: {len(tracks)} vehicles at {frame_rate:g} Hz, {len(meta.lanes)} lanes")
    return meta, tracks


def resample(
    track: RecordingTrack, from_hz: float, to_hz: float, origin: Optional[float] = None
) -> RecordingTrack:
    """
    Linear interpolation onto the uniform to_hz grid origin + i / to_hz. Grid times inside a gap of the
    source track (more than one and a half source frames between samples) are left out.

    :param track:
    :param from_hz: source rate
    :param to_hz: target rate, at most from_hz
    :param origin: grid anchor in seconds, defaults to the track's first time"""
    if not from_hz > 0 or not to_hz > 0:
        raise ValueError("Rates must be positive")
    if to_hz > from_hz:
        raise ValueError(f"Cannot upsample from {from_hz} Hz to {to_hz} Hz")
    if math.isclose(from_hz, to_hz) and origin is None:
        return track
    if len(track) == 0:
        return track
    origin = float(track.times[0]) if origin is None else float(origin)
    first = math.ceil((track.times[0] - origin) * to_hz - 1e-9)
    last = math.floor((track.times[-1] - origin) * to_hz + 1e-9)
    grid = origin + numpy.arange(first, last + 1) / to_hz
    grid = grid[(grid >= track.times[0] - 1e-9) & (grid <= track.times[-1] + 1e-9)]

    after = numpy.clip(numpy.searchsorted(track.times, grid - 1e-9, side="left"), 0, len(track) - 1)
    before = numpy.clip(after - 1, 0, len(track) - 1)
    exact = numpy.isclose(track.times[after], grid, atol=1e-9)
    spans = track.times[after] - track.times[before]
    grid = grid[exact | (spans <= 1.5 / from_hz)]

    positions = numpy.column_stack(
        [numpy.interp(grid, track.times, track.positions[:, axis]) for axis in range(2)]
    )
    return RecordingTrack(track.vehicle_id, grid, positions)


def resample_recording(recording: Recording, to_hz: float) -> Recording:
    """
    Resample every track on one grid anchored at recording time zero, keeping vehicles aligned."""
    if math.isclose(recording.meta.frame_rate, to_hz):
        return recording
    tracks = [resample(track, recording.meta.frame_rate, to_hz, origin=0.0) for track in recording.tracks]
    kept = tuple(track for track in tracks if len(track))
    return Recording(replace(recording.meta, frame_rate=to_hz), kept)


def _step_index(track: RecordingTrack, rate: float) -> Dict[int, numpy.ndarray]:
    return {int(round(time * rate)): position for time, position in zip(track.times, track.positions)}


def _lane_of(lanes: Iterable[Lane], lateral: float) -> Optional[Lane]:
    for lane in lanes:
        if lane.contains(lateral):
            return lane
    return None


def _track_spans(indexed: Dict[int, Dict[int, numpy.ndarray]]) -> pandas.DataFrame:
    """First and last step of every non-empty track, sorted by first step, with the recording order kept."""
    rows = [
        (order, vehicle_id, min(steps), max(steps))
        for order, (vehicle_id, steps) in enumerate(indexed.items())
        if steps
    ]
    spans = pandas.DataFrame(rows, columns=["order", "vehicle_id", "first", "last"])
    return spans.sort_values(["first", "order"], kind="stable").reset_index(drop=True)


def _overlapping(spans: pandas.DataFrame, start: int, end: int) -> List[int]:
    """Vehicle ids present somewhere in steps start..end, in recording order."""
    head = spans.iloc[: spans["first"].searchsorted(end, side="right")]
    return head.loc[head["last"] >= start].sort_values("order")["vehicle_id"].tolist()


def extract_windows(
    recording: Recording,
    obs_s: float = 3.0,
    pred_s: float = 5.0,
    stride_s: float = 5.0,
    full_observation: bool = False,
) -> List[Scene]:
    """
    Cut every vehicle's track into scenes: obs_s of observations followed by pred_s of ground truth, window
    starts stride_s apart from the vehicle's first frame. The target needs a position at every future timestep
    and at the first timestep, inside a lane, and two observed timesteps overall; other windows are skipped.
    Surrounding vehicles present during the observation part are cropped to it with partial masks.

    :param recording: recording at the model rate
    :param full_observation: also skip windows whose target has gaps in the observation part, which the
     driver view cannot use as ego
    :return: scenes in (vehicle id, start) order"""
    rate = recording.meta.frame_rate
    dt = 1.0 / rate
    n, horizon, stride = (int(round(s * rate)) for s in (obs_s, obs_s + pred_s, stride_s))
    if n < 2 or stride < 1:
        raise ValueError(f"Windows too short at {rate:g} Hz: n={n}, stride={stride}")
    indexed = {track.vehicle_id: _step_index(track, rate) for track in recording.tracks}
    spans = _track_spans(indexed)

    scenes, gappy = [], 0
    for target in recording.tracks:
        steps = indexed[target.vehicle_id]
        if not steps:
            continue
        first, last = min(steps), max(steps)
        for start in range(first, last - horizon + 2, stride):
            scene_id = f"{recording.meta.recording_id}-{target.vehicle_id}-{start}"
            future = [start + offset for offset in range(n, horizon)]
            observed = [t for t in range(1, n + 1) if start + t - 1 in steps]
            if any(step not in steps for step in future):
                logger.info(f"Skipping {scene_id}: target has gaps in the prediction horizon")
                continue
            if 1 not in observed or len(observed) < 2:
                logger.info(f"Skipping {scene_id}: target needs the first and another observed timestep")
                continue
            if recording.meta.lanes and _lane_of(recording.meta.lanes, steps[start][1]) is None:
                logger.info(f"Skipping {scene_id}: target starts outside every lane")
                continue
            if len(observed) < n:
                if full_observation:
                    logger.info(f"Skipping {scene_id}: target has gaps in the observation window")
                    continue
                gappy += 1

            positions = numpy.full((horizon, 2), numpy.nan)
            for t in range(1, horizon + 1):
                if start + t - 1 in steps:
                    positions[t - 1] = steps[start + t - 1]
            others = []
            for vehicle_id in _overlapping(spans, start, start + n - 1):
                if vehicle_id == target.vehicle_id:
                    continue
                other_steps = indexed[vehicle_id]
                mask = [t for t in range(1, n + 1) if start + t - 1 in other_steps]
                if not mask:
                    continue
                other_positions = numpy.full((n, 2), numpy.nan)
                for t in mask:
                    other_positions[t - 1] = other_steps[start + t - 1]
                others.append(Track(vehicle_id, other_positions, frozenset(mask)))
            scenes.append(
                Scene(
                    scene_id=scene_id,
                    target=Track(target.vehicle_id, positions, frozenset(observed)),
                    others=tuple(others),
                    lanes=recording.meta.lanes,
                    dt=dt,
                    n=n,
                    T=horizon,
                )
            )
    if gappy:
        logger.info(
            f"{recording.meta.recording_id}: {gappy} windows keep targets with observation gaps, "
            "the driver view rejects them"
        )
    logger.info(f"{recording.meta.recording_id}: {len(scenes)} windows from {len(recording.tracks)} vehicles")
    return scenes


def write_scene_archive(path: Union[str, Path], scenes: Sequence[Scene], manifest: dict = None) -> Path:
    """
    Write {"scenes": [...]} to path and, when given, the manifest to the ".manifest.json" sidecar."""
    path = write_json(path, {"scenes": [scene.to_dict() for scene in scenes]})
    if manifest is not None:
        write_json(sidecar_path(path, "manifest"), manifest)
    return path


def read_scene_archive(path: Union[str, Path]) -> List[Scene]:
    """"""
    document = read_json(path)
    if not isinstance(document, dict) or not isinstance(document.get("scenes"), list):
        raise DataFormatError('Scene archive must hold a "scenes" list', source=str(path))
    scenes = []
    for index, entry in enumerate(document["scenes"]):
        try:
            scenes.append(Scene.from_dict(entry))
        except HighwayBMAError as e:
            raise DataFormatError(f"Scene {index}: {e}", source=str(path)) from e
        except (TypeError, ValueError, AttributeError) as e:
            raise DataFormatError(f"Scene {index} is malformed: {e}", source=str(path)) from e
    return scenes
