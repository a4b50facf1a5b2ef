#!/usr/bin/env python3
# -*- coding: utf-8 -*-

__author__ = "Christian Heider Nielsen"
__doc__ = r"""
Gaussian beliefs over augmented state/parameter vectors.

           Created on 18/10/2026
           """

__all__ = ["GaussianBelief", "PSD_TOLERANCE"]

from dataclasses import dataclass
from typing import Sequence

import numpy

from highwaybma.errors import NonPSDCovarianceError

PSD_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class GaussianBelief:
    mean: numpy.ndarray
    covariance: numpy.ndarray

    def __post_init__(self):
        mean = numpy.array(self.mean, dtype=float).reshape(-1)
        covariance = numpy.array(self.covariance, dtype=float).reshape(len(mean), len(mean))
        covariance = 0.5 * (covariance + covariance.T)
        mean.setflags(write=False)
        covariance.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", covariance)

    @property
    def dimension(self) -> int:
        """"""
        return len(self.mean)

    @classmethod
    def from_std(cls, mean: Sequence[float], std: Sequence[float]) -> "GaussianBelief":
        """Independent components."""
        variances = numpy.square(numpy.asarray(std, dtype=float))
        return cls(numpy.asarray(mean, dtype=float), numpy.diag(variances))

    def check_psd(self, context: str = "") -> "GaussianBelief":
        """
        Raise NonPSDCovarianceError unless every eigenvalue is at least -PSD_TOLERANCE, scaled by the
        covariance magnitude."""
        scale = max(1.0, float(numpy.max(numpy.abs(self.covariance))))
        smallest = float(numpy.linalg.eigvalsh(self.covariance).min())
        if not numpy.all(numpy.isfinite(self.covariance)) or smallest < -PSD_TOLERANCE * scale:
            raise NonPSDCovarianceError(
                f"Covariance is not positive semi-definite{f' ({context})' if context else ''}: "
                f"smallest eigenvalue {smallest:.3e}"
            )
        return self

    def to_dict(self) -> dict:
        """"""
        return {"mean": self.mean.tolist(), "covariance": self.covariance.tolist()}
