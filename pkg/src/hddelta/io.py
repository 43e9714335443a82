"""CSV readers and writers for datasets, vectors and matrices."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .estimators import Dataset
from .exceptions import DimensionError


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def _read_rows(path) -> tuple[list, list]:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ValueError(f"{path}: no data")
    header = []
    if not all(_is_number(c) for c in rows[0]):
        header, rows = [c.strip() for c in rows[0]], rows[1:]
    try:
        data = [[float(c) for c in r] for r in rows]
    except ValueError as e:
        raise ValueError(f"{path}: non-numeric entry ({e})") from None
    if len({len(r) for r in data}) > 1:
        raise ValueError(f"{path}: ragged rows")
    return header, data


def read_matrix(path) -> np.ndarray:
    """Numeric CSV, optional header row."""
    _, data = _read_rows(path)
    if not data:
        raise ValueError(f"{path}: header but no rows")
    return np.array(data, dtype=float)


def read_vector(path) -> np.ndarray:
    """Single-column CSV (a single row is also accepted)."""
    M = read_matrix(path)
    if M.shape[1] != 1 and M.shape[0] != 1:
        raise DimensionError(f"{path}: expected one column, got shape {M.shape}")
    return M.ravel()


def read_table(path) -> tuple[list, np.ndarray]:
    header, data = _read_rows(path)
    M = np.array(data, dtype=float)
    if not header:
        header = [f"c{j + 1}" for j in range(M.shape[1])]
    return header, M


def read_dataset(path) -> Dataset:
    """CSV with a header; first column y, the rest x_1..x_p."""
    _, M = read_table(path)
    if M.ndim != 2 or M.shape[1] < 2:
        raise DimensionError(f"{path}: need a y column and at least one x column")
    return Dataset(M[:, 1:], M[:, 0])


def write_dataset(path, data: Dataset) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["y"] + [f"x{j + 1}" for j in range(data.p)])
        for yi, xi in zip(data.y, data.X):
            w.writerow([repr(float(yi))] + [repr(float(v)) for v in xi])


def write_vector(path, v, name: str = "value") -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([name])
        for x in np.asarray(v, dtype=float).ravel():
            w.writerow([repr(float(x))])


def write_matrix(path, M) -> None:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in M:
            w.writerow([repr(float(x)) for x in row])


def write_text(path, text: str) -> None:
    Path(path).write_text(text)
