"""Delimited-text ingestion and quadratic term expansion."""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .regress import Dataset, standardize

__all__ = ["ExpansionSpec", "ingest", "expand", "diabetes_path", "load_diabetes"]


@dataclass(frozen=True)
class ExpansionSpec:
    """Which quadratic terms to append to a pool of main effects."""

    square_excluded: tuple = ()
    include_interactions: bool = True

    def __post_init__(self):
        object.__setattr__(self, "square_excluded", tuple(self.square_excluded))


def _sniff_delimiter(header: str) -> str:
    return "\t" if header.count("\t") >= header.count(",") else ","


def ingest(path, response: str, standardize_data: bool = True) -> Dataset:
    """Read a delimited text file with a header row into a Dataset.

    The named response column is separated out; remaining columns
    become candidates.  Cells must be numeric; errors name the
    offending row and column.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty file")
    delim = _sniff_delimiter(lines[0])
    header = [h.strip() for h in lines[0].split(delim)]
    if response not in header:
        raise ValueError(f"{path}: response column {response!r} not found in header")
    if len(lines) - 1 < 3:
        raise ValueError(f"{path}: need at least 3 data rows, found {len(lines) - 1}")
    rows = []
    for ridx, line in enumerate(lines[1:], start=1):
        cells = line.split(delim)
        if len(cells) != len(header):
            raise ValueError(f"{path}: row {ridx} has {len(cells)} cells, expected {len(header)}")
        row = []
        for cidx, cell in enumerate(cells):
            try:
                row.append(float(cell))
            except ValueError:
                raise ValueError(
                    f"{path}: non-numeric cell at row {ridx}, column {header[cidx]!r}: {cell!r}"
                ) from None
        rows.append(row)
    data = np.array(rows)
    ycol = header.index(response)
    keep = [j for j in range(len(header)) if j != ycol]
    ds = Dataset(
        y=data[:, ycol],
        X=data[:, keep],
        names=tuple(header[j] for j in keep),
    )
    return standardize(ds) if standardize_data else ds


def expand(dataset: Dataset, spec: ExpansionSpec) -> Dataset:
    """Append pairwise products and permitted squares, then re-standardize.

    Products are taken between the standardized main-effect columns, so
    the expanded pool matches the usual quadratic construction for
    standardized regression data.
    """
    base = dataset if dataset.standardized else standardize(dataset)
    unknown = set(spec.square_excluded) - set(base.names)
    if unknown:
        raise ValueError(f"unknown column name(s) in square exclusions: {sorted(unknown)}")
    cols = [base.X[:, j] for j in range(base.m)]
    names = list(base.names)
    if spec.include_interactions:
        for a, b in combinations(range(base.m), 2):
            names.append(f"{base.names[a]}*{base.names[b]}")
            cols.append(base.X[:, a] * base.X[:, b])
    for j in range(base.m):
        if base.names[j] not in spec.square_excluded:
            names.append(f"{base.names[j]}^2")
            cols.append(base.X[:, j] ** 2)
    raw = Dataset(
        y=dataset.y,
        X=np.column_stack(cols),
        names=tuple(names),
        intercept_forced=dataset.intercept_forced,
    )
    return standardize(raw)


def diabetes_path() -> str:
    """Filesystem path of the bundled diabetes fixture."""
    return str(importlib.resources.files("stepfdr").joinpath("data/diabetes.tsv"))


def load_diabetes(standardize_data: bool = True) -> Dataset:
    return ingest(diabetes_path(), response="Y", standardize_data=standardize_data)
