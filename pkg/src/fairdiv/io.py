"""Readers and writers for the two on-disk dataset formats.

Point CSV::

    id,group,x1,...,xD
    a0,a,0.0

Matrix text: line 1 holds ``n``, line 2 the comma-separated group labels,
then ``n`` rows of ``n`` comma-separated distances.  Matrix points get the
ids ``p1..pn``.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import IO, Iterable

import numpy as np

from .core import Dataset, FairDivError, MetricError, check_matrix


class DatasetFormatError(FairDivError, ValueError):
    pass


def _parse_float(tok: str, lineno: int) -> float:
    try:
        val = float(tok)
    except ValueError:
        raise DatasetFormatError(f"line {lineno}: not a number: {tok!r}") from None
    if val != val or val in (float("inf"), float("-inf")):
        raise DatasetFormatError(f"line {lineno}: non-finite value {tok!r}")
    return val


def parse_points_csv(text: str) -> Dataset:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise DatasetFormatError("line 1: empty file")
    header = [h.strip() for h in rows[0]]
    if len(header) < 3 or header[0] != "id" or header[1] != "group":
        raise DatasetFormatError("line 1: header must be id,group,x1,...,xD")
    dim = len(header) - 2
    ids, groups, coords = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != dim + 2:
            raise DatasetFormatError(
                f"line {lineno}: expected {dim + 2} fields, got {len(row)} (inconsistent dimension)"
            )
        pid, grp = row[0].strip(), row[1].strip()
        if not pid:
            raise DatasetFormatError(f"line {lineno}: empty id")
        if not grp:
            raise DatasetFormatError(f"line {lineno}: bad group label")
        ids.append(pid)
        groups.append(grp)
        coords.append([_parse_float(t.strip(), lineno) for t in row[2:]])
    if not ids:
        raise DatasetFormatError("no data rows")
    if len(set(ids)) != len(ids):
        seen: set[str] = set()
        for lineno, pid in enumerate(ids, start=2):
            if pid in seen:
                raise DatasetFormatError(f"line {lineno}: duplicate id {pid!r}")
            seen.add(pid)
    return Dataset(ids, groups, coords=np.array(coords, dtype=np.float64))


def parse_matrix(text: str, validate: bool = True) -> Dataset:
    lines = [ln for ln in text.splitlines()]
    if len(lines) < 2:
        raise DatasetFormatError("matrix file needs at least two lines")
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise DatasetFormatError(f"line 1: expected point count, got {lines[0]!r}") from None
    groups = [g.strip() for g in lines[1].split(",")]
    if len(groups) != n or any(not g for g in groups):
        raise DatasetFormatError(f"line 2: expected {n} group labels")
    body = [ln for ln in lines[2:] if ln.strip()]
    if len(body) != n:
        raise DatasetFormatError(f"expected {n} matrix rows, got {len(body)}")
    mat = np.empty((n, n), dtype=np.float64)
    for r, ln in enumerate(body):
        toks = ln.split(",")
        if len(toks) != n:
            raise DatasetFormatError(f"line {r + 3}: expected {n} values, got {len(toks)}")
        mat[r] = [_parse_float(t.strip(), r + 3) for t in toks]
    if validate:
        try:
            check_matrix(mat)
        except MetricError as exc:
            raise DatasetFormatError(str(exc)) from None
    return Dataset.from_matrix(mat, groups, validate=False)


def load_dataset(path: str | Path, fmt: str = "auto") -> Dataset:
    """Load a dataset; ``fmt`` is ``csv``, ``matrix`` or ``auto`` (sniff line 1)."""
    text = Path(path).read_text(encoding="utf-8")
    if fmt == "auto":
        first = text.lstrip().split("\n", 1)[0].strip()
        fmt = "matrix" if first.isdigit() else "csv"
    if fmt == "csv":
        return parse_points_csv(text)
    if fmt == "matrix":
        return parse_matrix(text)
    raise ValueError(f"unknown dataset format {fmt!r}")


def _fmt(x: float) -> str:
    return repr(float(x))


def write_points_csv(dataset: Dataset, fh: IO[str]) -> None:
    if dataset.coords is None:
        raise ValueError("point CSV needs coordinates")
    dim = dataset.coords.shape[1]
    fh.write(",".join(["id", "group"] + [f"x{d + 1}" for d in range(dim)]) + "\n")
    for i, pid in enumerate(dataset.ids):
        vals = [_fmt(v) for v in dataset.coords[i]]
        fh.write(",".join([pid, dataset.group_names[dataset.groups[i]]] + vals) + "\n")


def write_matrix(dataset: Dataset, fh: IO[str]) -> None:
    fh.write(f"{dataset.n}\n")
    fh.write(",".join(dataset.group_names[g] for g in dataset.groups) + "\n")
    for row in dataset.matrix:
        fh.write(",".join(_fmt(v) for v in row) + "\n")


def dumps(dataset: Dataset, fmt: str | None = None) -> str:
    buf = io.StringIO()
    fmt = fmt or ("csv" if dataset.is_euclidean else "matrix")
    (write_points_csv if fmt == "csv" else write_matrix)(dataset, buf)
    return buf.getvalue()


def read_partition_file(path: str | Path) -> dict[str, int]:
    """``point-id,site`` lines (an optional header line is skipped)."""
    out: dict[str, int] = {}
    for lineno, row in enumerate(csv.reader(Path(path).read_text(encoding="utf-8").splitlines()), 1):
        if not row or not row[0].strip():
            continue
        if lineno == 1 and row[-1].strip() == "site":
            continue
        if len(row) != 2:
            raise DatasetFormatError(f"line {lineno}: expected point-id,site")
        try:
            out[row[0].strip()] = int(row[1])
        except ValueError:
            raise DatasetFormatError(f"line {lineno}: bad site {row[1]!r}") from None
    return out


def format_ids(ids: Iterable[str]) -> str:
    return ",".join(ids)
