#!/usr/bin/env python3
# -*- coding: utf-8 -*-

__author__ = "Christian Heider Nielsen"
__doc__ = r"""
Independent random streams from one master seed.

           Created on 18/10/2026
           """

__all__ = ["scene_rng"]

import numpy


def scene_rng(seed: int, scene_index: int) -> numpy.random.Generator:
    """
    Generator for the scene at position scene_index of a batch. Streams depend only on (seed, scene_index),
    so batches give identical results whatever the worker count or completion order."""
    if seed < 0 or scene_index < 0:
        raise ValueError(f"Seed and scene index must be non-negative, got {seed}, {scene_index}")
    return numpy.random.default_rng(numpy.random.SeedSequence([seed, scene_index]))
