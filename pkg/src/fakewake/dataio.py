"""Location and parsing of the bundled TSV data files.

Every table ships under ``fakewake/data/``; the ``FAKEWAKE_DATA_DIR``
environment variable points loaders at an alternative directory.
"""
from __future__ import annotations

import os
from pathlib import Path

_BUNDLED = Path(__file__).parent / "data"


def data_dir() -> Path:
    override = os.environ.get("FAKEWAKE_DATA_DIR")
    return Path(override) if override else _BUNDLED


def data_path(name: str) -> Path:
    path = data_dir() / name
    if not path.exists():
        raise FileNotFoundError(f"data file not found: {path}")
    return path


def read_tsv(name: str) -> list[list[str]]:
    """All non-comment rows of a bundled TSV, split on tabs."""
    rows = []
    with open(data_path(name), encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            rows.append(line.split("\t"))
    return rows


def read_weight_rows(name: str) -> list[list[str]]:
    """The ``#weight`` comment rows of a table, in file order."""
    rows = []
    with open(data_path(name), encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#weight\t"):
                rows.append(line.rstrip("\n").split("\t")[1:])
    return rows
