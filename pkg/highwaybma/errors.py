#!/usr/bin/env python3
# -*- coding: utf-8 -*-

__author__ = "Christian Heider Nielsen"
__doc__ = r"""
Exception hierarchy. Every error carries the process exit code the command line reports for it.

           Created on 18/10/2026
           """

__all__ = [
    "HighwayBMAError",
    "InputError",
    "ConfigError",
    "DataFormatError",
    "OutOfRoadError",
    "NumericalError",
    "NonPSDCovarianceError",
    "NoViableComponentError",
]


class HighwayBMAError(Exception):
    exit_code = 1


class InputError(HighwayBMAError, ValueError):
    """Bad user input: files, columns, configuration or scene geometry."""

    exit_code = 1


class ConfigError(InputError):
    pass


class DataFormatError(InputError):
    """
    Raised while parsing recordings and archives.

    :param message: what went wrong
    :param source: file the problem was found in
    :param row: 1-based line number in the source file, header included
    :param column: offending column name"""

    def __init__(self, message: str, *, source: str = None, row: int = None, column: str = None):
        context = []
        if source is not None:
            context.append(f"file {source}")
        if row is not None:
            context.append(f"row {row}")
        if column is not None:
            context.append(f"column {column!r}")
        if context:
            message = f"{message} ({', '.join(context)})"
        super().__init__(message)
        self.source = source
        self.row = row
        self.column = column


class OutOfRoadError(InputError):
    """Lateral position outside every lane interval."""


class NumericalError(HighwayBMAError, ArithmeticError):
    exit_code = 2


class NonPSDCovarianceError(NumericalError):
    """Filter covariance lost positive semi-definiteness, usually an ill-conditioned configuration."""


class NoViableComponentError(NumericalError):
    """Every component has zero evidence."""
