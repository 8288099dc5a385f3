"""CSV formats: point files, distance specs, and matrices."""

import csv
from pathlib import Path

import numpy as np

from .embedding import DistanceSpec, pair_order
from .errors import MetricForgeError


class InputError(MetricForgeError, ValueError):
    pass


def fmt(value: float) -> str:
    # 17 significant digits round-trip every double exactly
    return format(float(value), ".17g")


def _rows(path):
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            yield lineno, [cell.strip() for cell in row]


def read_points(path):
    """Header row required; an optional final column named ``class`` holds integer labels.

    Returns ``(points, labels_or_None, column_names)``.
    """
    rows = _rows(path)
    try:
        _, header = next(rows)
    except StopIteration:
        raise InputError(f"{path}: empty points file") from None
    has_class = header[-1].lower() == "class"
    ncoord = len(header) - (1 if has_class else 0)
    if ncoord < 1:
        raise InputError(f"{path}:1: need at least one coordinate column")
    points, labels = [], []
    for lineno, row in rows:
        if len(row) != len(header):
            raise InputError(f"{path}:{lineno}: expected {len(header)} columns, got {len(row)}")
        try:
            points.append([float(v) for v in row[:ncoord]])
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from None
        if has_class:
            try:
                labels.append(int(row[-1]))
            except ValueError:
                raise InputError(f"{path}:{lineno}: class must be an integer, got {row[-1]!r}") from None
    if not points:
        raise InputError(f"{path}: no data rows")
    return np.array(points), (np.array(labels) if has_class else None), header[:ncoord]


def write_points(path, points, labels=None, names=None):
    points = np.atleast_2d(points)
    names = names or [f"x{k + 1}" for k in range(points.shape[1])]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(names) + (["class"] if labels is not None else []))
        for idx, p in enumerate(points):
            row = [fmt(v) for v in p]
            if labels is not None:
                row.append(str(int(labels[idx])))
            w.writerow(row)


def read_distances(path, m: int) -> DistanceSpec:
    """Triples ``i,j,delta`` with 1-based indices and i < j; optional header row."""
    delta = {}
    for lineno, row in _rows(path):
        if lineno == 1 and row and row[0].lower() == "i":
            continue
        if len(row) != 3:
            raise InputError(f"{path}:{lineno}: expected 'i,j,delta', got {len(row)} fields")
        try:
            i, j, value = int(row[0]), int(row[1]), float(row[2])
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from None
        if not i < j:
            raise InputError(f"{path}:{lineno}: indices must satisfy i < j, got ({i},{j})")
        if not (1 <= i and j <= m):
            raise InputError(f"{path}:{lineno}: pair ({i},{j}) out of range for {m} points")
        if (i - 1, j - 1) in delta:
            raise InputError(f"{path}:{lineno}: duplicate pair ({i},{j})")
        if not value > 0:
            raise InputError(f"{path}:{lineno}: delta must be positive, got {value}")
        delta[(i - 1, j - 1)] = value
    return DistanceSpec(m, delta)


def write_distances(path, spec: DistanceSpec):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j", "delta"])
        for i, j in pair_order(spec.m):
            w.writerow([i + 1, j + 1, fmt(spec[i, j])])


def write_matrix(path, matrix):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for row in np.atleast_2d(matrix):
            w.writerow([fmt(v) for v in row])


def read_matrix(path):
    return np.array([[float(v) for v in row] for _, row in _rows(path)])
