#!/usr/bin/env python3
# -*- coding: utf-8 -*-

__author__ = "Christian Heider Nielsen"
__doc__ = r"""

           Created on 18/10/2026
           """

__all__ = ["setup_logging", "LOG_FILE_NAME"]

import logging
from pathlib import Path
from typing import Optional

from highwaybma.utilities.path_utilities import ensure_existence

LOG_FILE_NAME = "highwaybma.log"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def setup_logging(verbosity: int = 0, log_dir: Optional[Path] = None) -> logging.Logger:
    """
    Attach a stderr handler to the package logger, and a file handler in log_dir when given.

    :param verbosity: 0 warnings, 1 info, 2 or more debug
    :param log_dir: directory of the log file, None for no file
    :return: the package logger"""
    logger = logging.getLogger("highwaybma")
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logger.setLevel(min(level, logging.INFO) if log_dir is not None else level)

    stream = logging.StreamHandler()
    stream.setLevel(level)
    stream.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    logger.addHandler(stream)

    if log_dir is not None:
        file_handler = logging.FileHandler(ensure_existence(Path(log_dir)) / LOG_FILE_NAME)
        file_handler.setLevel(min(level, logging.INFO))
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(file_handler)
    return logger
