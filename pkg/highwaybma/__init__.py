#!/usr/bin/env python3
# -*- coding: utf-8 -*-

__project__ = "HighwayBMA"
__author__ = "Christian Heider Nielsen"
__version__ = "0.1.0"
__doc__ = r"""
Created on 18/10/2026

Multi-modal highway trajectory prediction by Bayesian model averaging over kinematic car-following and
lane-change hypotheses, each estimated with an augmented-state Kalman filter.

@author: cnheider
"""

from apppath import AppPath

from .errors import *
from .kinematics import *
from .behavior_models import *
from .scene import *
from .inference import *
from .metrics import *
from .sensing import *
from .data_io import *
from .config import *
from .synthetic import *

PROJECT_NAME = __project__.lower().strip().replace(" ", "_")
PROJECT_VERSION = __version__
PROJECT_YEAR = 2026
PROJECT_AUTHOR = __author__.lower().strip().replace(" ", "_")

__version_info__ = tuple(int(segment) for segment in __version__.split("."))

PROJECT_APP_PATH = AppPath(app_name=PROJECT_NAME, app_author=PROJECT_AUTHOR)
