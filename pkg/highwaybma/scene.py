#!/usr/bin/env python3
# -*- coding: utf-8 -*-

__author__ = "Christian Heider Nielsen"
__doc__ = r"""
Scene, track and lane data model, the target vehicle's field of view and the (lane, leader) candidate pairs.

Timesteps are 1-based: index 0 of a position array is timestep 1. Positions are (longitudinal, lateral) in
meters, already in lane-aligned road coordinates.

           Created on 18/10/2026
           """

__all__ = [
    "Track",
    "Lane",
    "Scene",
    "CandidatePair",
    "current_lane",
    "field_of_view",
    "lead_candidates",
    "candidate_set",
    "lanes_from_boundaries",
]

import math
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy

from highwaybma.errors import DataFormatError, InputError, OutOfRoadError

DEFAULT_TAU_F = 50.0
DEFAULT_TAU_R = 10.0


@dataclass(frozen=True, eq=False)
class Track:
    """
    One vehicle's positions on the scene's timestep grid.

    positions has shape (length, 2) with NaN where the position is unknown. The mask holds the timesteps at
    which the position counts as observed; known but unmasked positions (the target's future, occluded
    vehicles) stay available for evaluation and for re-deriving masks."""

    vehicle_id: int
    positions: numpy.ndarray
    mask: FrozenSet[int]

    def __post_init__(self):
        positions = numpy.array(self.positions, dtype=float).reshape(-1, 2)
        positions.setflags(write=False)
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "mask", frozenset(int(t) for t in self.mask))
        for t in self.mask:
            if not 1 <= t <= len(positions):
                raise InputError(
                    f"Vehicle {self.vehicle_id}: observed timestep {t} outside 1..{len(positions)}"
                )
            if not numpy.all(numpy.isfinite(positions[t - 1])):
                raise InputError(
                    f"Vehicle {self.vehicle_id}: observed position at timestep {t} is not finite"
                )

    def __len__(self) -> int:
        return len(self.positions)

    def observed(self, t: int) -> bool:
        """"""
        return t in self.mask

    def position(self, t: int) -> numpy.ndarray:
        """"""
        return self.positions[t - 1]

    @property
    def observed_steps(self) -> List[int]:
        """"""
        return sorted(self.mask)

    def with_mask(self, mask: Iterable[int]) -> "Track":
        """"""
        return replace(self, mask=frozenset(mask))

    def cropped(self, length: int) -> "Track":
        """First `length` timesteps, mask restricted accordingly."""
        return Track(self.vehicle_id, self.positions[:length], frozenset(t for t in self.mask if t <= length))

    def to_dict(self, role: str) -> dict:
        """"""
        points = [
            {"t": t, "x": float(x), "y": float(y)}
            for t, (x, y) in enumerate(self.positions, start=1)
            if math.isfinite(x) and math.isfinite(y)
        ]
        return {"id": self.vehicle_id, "role": role, "points": points, "mask": sorted(self.mask)}

    @classmethod
    def from_dict(cls, data: dict, length: int) -> "Track":
        """"""
        positions = numpy.full((length, 2), numpy.nan)
        for point in data["points"]:
            t = int(point["t"])
            if not 1 <= t <= length:
                raise DataFormatError(f"Vehicle {data['id']}: point timestep {t} outside 1..{length}")
            positions[t - 1] = (point["x"], point["y"])
        return cls(int(data["id"]), positions, frozenset(data["mask"]))


@dataclass(frozen=True)
class Lane:
    """
    Half-open lateral interval [lower, upper) with its center and the lanes a driver may merge into."""

    index: int
    lower: float
    upper: float
    center: float
    adjacent: FrozenSet[int] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "adjacent", frozenset(int(a) for a in self.adjacent))
        if not self.lower < self.upper:
            raise InputError(f"Lane {self.index}: lower bound {self.lower} must be below upper {self.upper}")
        if not self.lower < self.center < self.upper:
            raise InputError(f"Lane {self.index}: center {self.center} outside ({self.lower}, {self.upper})")

    def contains(self, lateral: float) -> bool:
        """"""
        return self.lower <= lateral < self.upper

    def to_dict(self) -> dict:
        """"""
        return {
            "id": self.index,
            "lower": self.lower,
            "upper": self.upper,
            "center": self.center,
            "adjacent": sorted(self.adjacent),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Lane":
        """"""
        return cls(
            int(data["id"]),
            float(data["lower"]),
            float(data["upper"]),
            float(data["center"]),
            frozenset(data.get("adjacent", ())),
        )


def lanes_from_boundaries(boundaries: Sequence[float], first_index: int = 0) -> List[Lane]:
    """
    Contiguous lanes between sorted lane markings, each adjacent to its neighbours.

    :param boundaries: increasing lateral marking positions, one more than the number of lanes
    :param first_index: index of the lowest lane"""
    boundaries = [float(b) for b in boundaries]
    if any(b1 <= b0 for b0, b1 in zip(boundaries, boundaries[1:])):
        raise InputError(f"Lane markings must be strictly increasing, got {boundaries}")
    count = len(boundaries) - 1
    lanes = []
    for offset, (lower, upper) in enumerate(zip(boundaries, boundaries[1:])):
        index = first_index + offset
        adjacent = {i for i in (index - 1, index + 1) if first_index <= i < first_index + count}
        lanes.append(Lane(index, lower, upper, 0.5 * (lower + upper), frozenset(adjacent)))
    return lanes


@dataclass(frozen=True, eq=False)
class Scene:
    """
    Target track, surrounding tracks and lane geometry over a shared timestep grid.

    The target track covers timesteps 1..T (future positions are ground truth, never in the mask); the
    surrounding tracks cover the observation window 1..n."""

    scene_id: str
    target: Track
    others: Tuple[Track, ...]
    lanes: Tuple[Lane, ...]
    dt: float
    n: int
    T: int

    def __post_init__(self):
        object.__setattr__(self, "others", tuple(self.others))
        object.__setattr__(self, "lanes", tuple(self.lanes))
        if not self.dt > 0:
            raise InputError(f"Scene {self.scene_id}: timestep must be positive")
        if not 1 <= self.n < self.T:
            raise InputError(f"Scene {self.scene_id}: need 1 <= n < T, got n={self.n}, T={self.T}")
        if 1 not in self.target.mask:
            raise InputError(f"Scene {self.scene_id}: the target must be observed at the first timestep")
        if max(self.target.mask) > self.n:
            raise InputError(f"Scene {self.scene_id}: target observations beyond the window n={self.n}")
        ids = [track.vehicle_id for track in self.others]
        if len(set(ids)) != len(ids) or self.target.vehicle_id in ids:
            raise InputError(f"Scene {self.scene_id}: duplicate vehicle ids")
        for track in self.others:
            if track.mask and max(track.mask) > self.n:
                raise InputError(f"Scene {self.scene_id}: vehicle {track.vehicle_id} observed beyond n")

    @property
    def lane_map(self) -> Dict[int, Lane]:
        """"""
        return {lane.index: lane for lane in self.lanes}

    def other(self, vehicle_id: int) -> Track:
        """"""
        for track in self.others:
            if track.vehicle_id == vehicle_id:
                return track
        raise KeyError(vehicle_id)

    def without_others(self) -> "Scene":
        """Same scene with the surrounding vehicles removed (V = ∅)."""
        return replace(self, others=())

    def to_dict(self) -> dict:
        """"""
        return {
            "id": self.scene_id,
            "dt": self.dt,
            "n": self.n,
            "T": self.T,
            "lanes": [lane.to_dict() for lane in self.lanes],
            "tracks": [self.target.to_dict("target")] + [track.to_dict("other") for track in self.others],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Scene":
        """"""
        try:
            n, horizon = int(data["n"]), int(data["T"])
            targets = [track for track in data["tracks"] if track["role"] == "target"]
            if len(targets) != 1:
                raise DataFormatError(
                    f"Scene {data.get('id')}: expected exactly one target, got {len(targets)}"
                )
            others = [Track.from_dict(t, n) for t in data["tracks"] if t["role"] == "other"]
            return cls(
                scene_id=str(data.get("id", "scene")),
                target=Track.from_dict(targets[0], horizon),
                others=tuple(others),
                lanes=tuple(Lane.from_dict(lane) for lane in data["lanes"]),
                dt=float(data["dt"]),
                n=n,
                T=horizon,
            )
        except KeyError as e:
            raise DataFormatError(f"Scene document is missing field {e}") from e


@dataclass(frozen=True)
class CandidatePair:
    """
    Lane i the driver heads for and vehicle j it follows, None for free driving."""

    lane: int
    leader: Optional[int] = None


def current_lane(scene: Scene) -> int:
    """
    Lane containing the target's lateral position at the first timestep."""
    lateral = scene.target.position(1)[1]
    containing = [lane.index for lane in scene.lanes if lane.contains(lateral)]
    if not containing:
        raise OutOfRoadError(
            f"Scene {scene.scene_id}: lateral position {lateral:.3f} m is outside every lane"
        )
    if len(containing) > 1:
        raise InputError(f"Scene {scene.scene_id}: lanes {containing} overlap at lateral {lateral:.3f} m")
    return containing[0]


def field_of_view(
    p: float, q: int, tau_f: float = DEFAULT_TAU_F, tau_r: float = DEFAULT_TAU_R
) -> Tuple[float, float]:
    """
    Longitudinal extent [p - q tau_r, p + tau_f]; q = 0 drops the rear part."""
    if tau_f < 0 or tau_r < 0:
        raise ValueError(f"View distances must be non-negative, got tau_f={tau_f}, tau_r={tau_r}")
    return p - q * tau_r, p + tau_f


def lead_candidates(
    scene: Scene, lane_index: int, tau_f: float = DEFAULT_TAU_F, tau_r: float = DEFAULT_TAU_R
) -> FrozenSet[int]:
    """
    Vehicles seen inside lane i at some observed timestep and inside the target's longitudinal view at some
    (possibly different) observed timestep.

    :param scene:
    :param lane_index: lane i
    :return: G(i)"""
    lane = scene.lane_map[lane_index]
    q = int(current_lane(scene) != lane_index)
    window = scene.target.observed_steps
    candidates = set()
    for track in scene.others:
        steps = [t for t in window if track.observed(t)]
        in_lane = any(lane.contains(track.position(t)[1]) for t in steps)
        if not in_lane:
            continue
        for t in steps:
            lower, upper = field_of_view(scene.target.position(t)[0], q, tau_f, tau_r)
            if lower <= track.position(t)[0] <= upper:
                candidates.add(track.vehicle_id)
                break
    return frozenset(candidates)


def candidate_set(
    scene: Scene, tau_f: float = DEFAULT_TAU_F, tau_r: float = DEFAULT_TAU_R
) -> Tuple[CandidatePair, ...]:
    """
    All (lane, leader) pairs for the current lane and its neighbours; a lane without lead candidates is
    paired with None. Ordered by lane, then leader id."""
    lane_index = current_lane(scene)
    lanes = scene.lane_map
    pairs = []
    for i in sorted({lane_index} | (lanes[lane_index].adjacent & set(lanes))):
        leaders = lead_candidates(scene, i, tau_f, tau_r)
        if leaders:
            pairs.extend(CandidatePair(i, j) for j in sorted(leaders))
        else:
            pairs.append(CandidatePair(i, None))
    return tuple(pairs)
