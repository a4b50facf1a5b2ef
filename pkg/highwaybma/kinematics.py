#!/usr/bin/env python3
# -*- coding: utf-8 -*-

__author__ = "Christian Heider Nielsen"
__doc__ = r"""
Discrete double-integrator dynamics and minimum-norm finite-horizon control, shared by the longitudinal and
the lateral behavior models.

           Created on 18/10/2026
           """

__all__ = [
    "StepMatrices",
    "AxisState",
    "step_matrices",
    "reachability_matrix",
    "min_norm_control",
    "first_input_gains",
    "propagate_zero_control",
]

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Tuple

import numpy

GRAMIAN_CONDITION_LIMIT = 1e12


def _frozen(array: numpy.ndarray) -> numpy.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class StepMatrices:
    """
    x(t+1) = A x(t) + B u(t) for a single axis, state (position, velocity)."""

    dt: float
    A: numpy.ndarray
    B: numpy.ndarray

    def power(self, k: int) -> numpy.ndarray:
        """A^k, closed form for the double integrator"""
        return numpy.array([[1.0, k * self.dt], [0.0, 1.0]])


@dataclass(frozen=True)
class AxisState:
    position: float
    velocity: float

    def __post_init__(self):
        if not (math.isfinite(self.position) and math.isfinite(self.velocity)):
            raise ValueError(f"Axis state must be finite, got ({self.position}, {self.velocity})")

    def as_array(self) -> numpy.ndarray:
        """"""
        return numpy.array([self.position, self.velocity], dtype=float)

    @classmethod
    def from_array(cls, array) -> "AxisState":
        """"""
        return cls(float(array[0]), float(array[1]))


def step_matrices(dt: float) -> StepMatrices:
    """
    :param dt: timestep in seconds
    :return: A = [[1, dt], [0, 1]], B = [0, 1]^T"""
    if not dt > 0:
        raise ValueError(f"Timestep must be positive, got {dt}")
    return StepMatrices(
        dt=float(dt),
        A=_frozen(numpy.array([[1.0, dt], [0.0, 1.0]])),
        B=_frozen(numpy.array([[0.0], [1.0]])),
    )


def reachability_matrix(k: int, mats: StepMatrices) -> numpy.ndarray:
    """
    C = [A^{k-1}B, ..., AB, B], shape 2 x k. A^j B = (j dt, 1)."""
    powers = numpy.arange(k - 1, -1, -1, dtype=float)
    return numpy.vstack([powers * mats.dt, numpy.ones(k)])


def _check_horizon(k: int) -> None:
    if int(k) != k or k < 2:
        raise ValueError(f"Horizon must be an integer of at least 2 steps, got {k}")


@lru_cache(maxsize=None)
def _least_norm_map(k: int, dt: float) -> numpy.ndarray:
    """C^T (C C^T)^{-1}, shape k x 2, cached per (horizon, timestep)."""
    c = reachability_matrix(k, step_matrices(dt))
    gramian = c @ c.T
    (a, b), (_, d) = gramian
    determinant = a * d - b * b
    assert determinant > 0, f"Singular reachability gramian for k={k}, dt={dt}"
    inverse = numpy.array([[d, -b], [-b, a]]) / determinant
    assert numpy.linalg.norm(gramian, 1) * numpy.linalg.norm(inverse, 1) < GRAMIAN_CONDITION_LIMIT, (
        f"Reachability gramian too ill-conditioned for k={k}, dt={dt}"
    )
    return _frozen(c.T @ inverse)


@lru_cache(maxsize=None)
def _gains(k: int, dt: float) -> Tuple[numpy.ndarray, numpy.ndarray]:
    g_f = numpy.array(_least_norm_map(k, dt)[0])
    g_x = -g_f @ step_matrices(dt).power(k)
    return _frozen(g_x), _frozen(g_f)


def min_norm_control(x0: AxisState, xf: AxisState, k: int, mats: StepMatrices) -> numpy.ndarray:
    """
    Least squared-magnitude input sequence steering x0 to xf in exactly k noiseless steps.

    :param x0: initial axis state
    :param xf: terminal axis state
    :param k: horizon in steps, at least 2
    :param mats: step matrices
    :return: control sequence u_0 .. u_{k-1}"""
    _check_horizon(k)
    residual = xf.as_array() - mats.power(k) @ x0.as_array()
    return _least_norm_map(int(k), mats.dt) @ residual


def first_input_gains(k: int, mats: StepMatrices) -> Tuple[numpy.ndarray, numpy.ndarray]:
    """
    Linear map of the first minimum-norm input, u_0 = G_x x0 + G_f xf.

    :return: (G_x, G_f), each of length 2, read-only"""
    _check_horizon(k)
    return _gains(int(k), mats.dt)


def propagate_zero_control(x0: AxisState, steps: int, mats: StepMatrices) -> List[AxisState]:
    """
    Constant-velocity rollout, states after each of the given number of steps (initial state excluded)."""
    if steps < 0:
        raise ValueError(f"Step count must be non-negative, got {steps}")
    times = numpy.arange(1, steps + 1) * mats.dt
    return [AxisState(x0.position + t * x0.velocity, x0.velocity) for t in times]
