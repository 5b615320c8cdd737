"""Normalization, synthetic generators and CSV loaders."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np

from .exceptions import InvalidConfigurationError, InvalidParameterError, ValidationError
from .model import DissimilarityMatrix, VectorDataset, validate_matrix


@dataclass(frozen=True)
class ZTransform:
    """Per-dimension mean and (population) standard deviation."""

    mean: np.ndarray
    std: np.ndarray

    def _scale(self) -> np.ndarray:
        # constant dimensions are only centered
        return np.where(self.std > 0, self.std, 1.0)

    def apply(self, data: VectorDataset) -> VectorDataset:
        return VectorDataset((data.points - self.mean) / self._scale(), data.labels)

    def inverse(self, data: VectorDataset) -> VectorDataset:
        return VectorDataset(data.points * self._scale() + self.mean, data.labels)


def z_transform(data: VectorDataset) -> Tuple[VectorDataset, ZTransform]:
    params = ZTransform(data.points.mean(axis=0), data.points.std(axis=0))
    return params.apply(data), params


# -- generators -------------------------------------------------------------------

def generate_checkerboard(rows: int, cols: int, min_pts: int, max_pts: int,
                          rng: np.random.Generator, cell_size: float = 1.0,
                          fill: float = 0.6) -> VectorDataset:
    """One uniform cluster per cell, inside the central ``fill`` fraction of the cell.

    Labels are 1 for cells with even row+col parity and 2 otherwise.
    """
    if rows < 1 or cols < 1:
        raise InvalidParameterError("checkerboard needs at least one row and column")
    if not 1 <= min_pts <= max_pts:
        raise InvalidParameterError("need 1 <= min_pts <= max_pts")
    margin = cell_size * (1.0 - fill) / 2.0
    points, labels = [], []
    for r in range(rows):
        for c in range(cols):
            count = int(rng.integers(min_pts, max_pts + 1))
            low = np.array([c * cell_size + margin, r * cell_size + margin])
            points.append(low + rng.uniform(0.0, cell_size * fill, size=(count, 2)))
            labels.extend([1 if (r + c) % 2 == 0 else 2] * count)
    return VectorDataset(np.vstack(points), np.array(labels))


def generate_blobs(centers, points_per_blob: int, spread: float,
                   rng: np.random.Generator) -> VectorDataset:
    """Isotropic Gaussian blobs; point labels are blob indices 0..k-1."""
    if not spread > 0:
        raise InvalidParameterError("spread must be positive")
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    points = [c + spread * rng.standard_normal((points_per_blob, centers.shape[1]))
              for c in centers]
    labels = np.repeat(np.arange(len(centers)), points_per_blob)
    return VectorDataset(np.vstack(points), labels)


def generate_block_matrix(block_sizes: Sequence[int], intra_range, inter_range,
                          rng: np.random.Generator):
    """Block-structured dissimilarities; returns ``(matrix, labels)``."""
    intra_lo, intra_hi = map(float, intra_range)
    inter_lo, inter_hi = map(float, inter_range)
    if intra_lo > intra_hi or inter_lo > inter_hi or intra_lo < 0:
        raise InvalidConfigurationError("ranges must be nonnegative (low, high) pairs")
    if intra_hi >= inter_lo:
        raise InvalidConfigurationError(
            f"intra range {intra_range} must lie entirely below inter range {inter_range}")
    labels = np.repeat(np.arange(len(block_sizes)), block_sizes)
    p = len(labels)
    same = labels[:, None] == labels[None, :]
    values = np.where(same, rng.uniform(intra_lo, intra_hi, size=(p, p)),
                      rng.uniform(inter_lo, inter_hi, size=(p, p)))
    upper = np.triu(values, k=1)
    return DissimilarityMatrix(upper + upper.T), labels


# -- loaders ------------------------------------------------------------------------

def _read_rows(path) -> list:
    with open(path, newline="") as fh:
        return [(lineno, row) for lineno, row in enumerate(csv.reader(fh))
                if row and any(cell.strip() for cell in row)]


def _parse_float(cell: str, row: int, col: int) -> float:
    try:
        return float(cell)
    except ValueError:
        raise ValidationError(f"row {row}, column {col}: not a number: {cell!r}",
                              row, col) from None


def load_points(path, label_column: bool = False) -> VectorDataset:
    """CSV with one point per row; the last column holds integer labels if requested."""
    rows = _read_rows(path)
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    width = len(rows[0][1])
    points, labels = [], []
    for lineno, row in rows:
        if len(row) != width:
            raise ValidationError(
                f"row {lineno}: expected {width} fields, found {len(row)}", lineno)
        values = [_parse_float(cell, lineno, col) for col, cell in enumerate(row)]
        if label_column:
            if width < 2:
                raise ValidationError(f"row {lineno}: label column needs >= 2 fields", lineno)
            label = values.pop()
            if label != int(label):
                raise ValidationError(f"row {lineno}: label {label!r} is not an integer",
                                      lineno, width - 1)
            labels.append(int(label))
        points.append(values)
    return VectorDataset(np.array(points), np.array(labels) if label_column else None)


def load_matrix(path) -> DissimilarityMatrix:
    rows = _read_rows(path)
    if not rows:
        raise ValidationError(f"{path}: empty matrix")
    p = len(rows)
    entries = np.empty((p, p))
    for r, (lineno, row) in enumerate(rows):
        if len(row) != p:
            raise ValidationError(
                f"row {r}: expected {p} columns for a {p}x{p} matrix, found {len(row)}", r)
        entries[r] = [_parse_float(cell, r, c) for c, cell in enumerate(row)]
    validate_matrix(entries)
    return DissimilarityMatrix(entries)


def load_labels(path) -> np.ndarray:
    labels = []
    with open(path) as fh:
        for lineno, line in enumerate(fh):
            text = line.strip()
            if not text:
                continue
            try:
                labels.append(int(text))
            except ValueError:
                raise ValidationError(f"line {lineno}: not an integer label: {text!r}",
                                      lineno) from None
    return np.array(labels, dtype=np.int64)


def load_indices(path, p: Optional[int] = None) -> np.ndarray:
    """Index-split file: one 0-based matrix index per line."""
    indices = load_labels(path)
    if p is not None and np.any((indices < 0) | (indices >= p)):
        raise ValidationError(f"{path}: split index out of range for p={p}")
    if len(np.unique(indices)) != len(indices):
        raise ValidationError(f"{path}: duplicate split indices")
    return indices


def save_points(path, data: VectorDataset) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for i, point in enumerate(data.points):
            row = [repr(float(v)) for v in point]
            if data.labels is not None:
                row.append(str(int(data.labels[i])))
            writer.writerow(row)


def save_matrix(path, matrix: DissimilarityMatrix) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in matrix.entries:
            writer.writerow([repr(float(v)) for v in row])


def save_labels(path, labels) -> None:
    Path(path).write_text("".join(f"{int(v)}\n" for v in labels))
