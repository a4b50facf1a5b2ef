#!/usr/bin/env python3
# -*- coding: utf-8 -*-

__author__ = "Christian Heider Nielsen"
__doc__ = r"""
Output path handling and deterministic JSON documents.

           Created on 18/10/2026
           """

__all__ = ["ensure_existence", "sidecar_path", "write_json", "read_json", "append_json_line"]

import json
from pathlib import Path
from typing import Any, Union

from highwaybma.errors import DataFormatError, InputError


def ensure_existence(out: Union[Path, str], *, declare_file: bool = False) -> Path:
    """
    Create the directory `out`, or its parent when it names a file.

    :param out:
    :param declare_file: treat `out` as a file even without a suffix
    :return: `out` as a Path"""
    out = Path(out)
    if declare_file or out.suffix:
        out.parent.mkdir(parents=True, exist_ok=True)
    else:
        out.mkdir(parents=True, exist_ok=True)
    return out


def sidecar_path(path: Union[Path, str], tag: str, suffix: str = ".json") -> Path:
    """
    archive.json -> archive.<tag><suffix>, next to the archive."""
    path = Path(path)
    return path.with_name(f"{path.stem}.{tag}{suffix}")


def write_json(path: Union[Path, str], document: Any) -> Path:
    """
    Byte-stable dump: sorted keys, two-space indent, trailing newline."""
    path = ensure_existence(path, declare_file=True)
    path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n")
    return path


def read_json(path: Union[Path, str]) -> Any:
    """"""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise InputError(f"Cannot read {path}: {e}") from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise DataFormatError(f"Not valid JSON: {e.msg}", source=path, row=e.lineno) from e


def append_json_line(path: Union[Path, str], record: Any) -> None:
    """"""
    path = ensure_existence(path, declare_file=True)
    with open(path, "a") as f:
        f.write(json.dumps(record, sort_keys=True) + "\n")
