#!/usr/bin/env python3
# -*- coding: utf-8 -*-

__author__ = "Christian Heider Nielsen"

import time


def benchmark_func(func, times=100):
    """
    Wall time of calling func `times` times, and its last result."""
    start = time.perf_counter()
    result = None
    for _ in range(times):
        result = func()
    end = time.perf_counter()
    return end - start, result
