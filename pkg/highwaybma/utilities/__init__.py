#!/usr/bin/env python3
# -*- coding: utf-8 -*-

__author__ = "Christian Heider Nielsen"
__doc__ = r"""

           Created on 18/10/2026
           """

from .path_utilities import *
from .seeding import *
from .logging_utilities import *
