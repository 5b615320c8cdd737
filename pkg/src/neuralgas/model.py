"""Domain types shared by the vector, batch and median algorithms.

All containers are frozen dataclasses holding read-only numpy arrays, so
they can be passed around freely without defensive copies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import (
    InvalidInputError,
    InvalidParameterError,
    ValidationError,
)

VECTOR = "vector"
MEDIAN = "median"

SYMMETRY_TOL = 1e-9
DIAGONAL_TOL = 1e-12


def _frozen(array, dtype=float):
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class VectorDataset:
    """p points in R^m with optional integer class labels."""

    points: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        if points.ndim == 1:
            points = points.reshape(-1, 1)
        if points.ndim != 2 or points.shape[0] < 1 or points.shape[1] < 1:
            raise InvalidInputError(
                f"points must be a non-empty p x m array, got shape {points.shape}")
        object.__setattr__(self, "points", _frozen(points))
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (points.shape[0],):
                raise InvalidInputError(
                    f"expected {points.shape[0]} labels, got shape {labels.shape}")
            object.__setattr__(self, "labels", _frozen(labels, dtype=np.int64))

    @property
    def p(self) -> int:
        return self.points.shape[0]

    @property
    def m(self) -> int:
        return self.points.shape[1]

    def subset(self, indices) -> "VectorDataset":
        indices = np.asarray(indices, dtype=np.int64)
        labels = None if self.labels is None else self.labels[indices]
        return VectorDataset(self.points[indices], labels)


def validate_matrix(entries: np.ndarray) -> None:
    """Raise :class:`ValidationError` naming the first offending entry."""
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or entries.shape[0] < 1:
        raise ValidationError(f"dissimilarity matrix must be square and non-empty, "
                              f"got shape {entries.shape}")
    if not np.all(np.isfinite(entries)):
        row, col = np.argwhere(~np.isfinite(entries))[0]
        raise ValidationError(f"row {row}, column {col}: non-finite entry", row, col)
    bad = np.flatnonzero(np.abs(np.diag(entries)) > DIAGONAL_TOL)
    if bad.size:
        i = int(bad[0])
        raise ValidationError(f"row {i}, column {i}: nonzero diagonal entry {float(entries[i, i])}", i, i)
    neg = np.argwhere(entries < 0)
    if neg.size:
        row, col = (int(v) for v in neg[0])
        raise ValidationError(f"row {row}, column {col}: negative entry {float(entries[row, col])}",
                              row, col)
    asym = np.argwhere(np.triu(np.abs(entries - entries.T) > SYMMETRY_TOL))
    if asym.size:
        row, col = (int(v) for v in asym[0])
        raise ValidationError(
            f"row {row}, column {col}: asymmetric, {float(entries[row, col])} here but "
            f"{float(entries[col, row])} at row {col}, column {row}", row, col)


@dataclass(frozen=True)
class DissimilarityMatrix:
    """Symmetric, nonnegative p x p matrix with zero diagonal."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        validate_matrix(entries)
        np.fill_diagonal(entries, 0.0)
        object.__setattr__(self, "entries", _frozen(entries))

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def submatrix(self, indices) -> "DissimilarityMatrix":
        indices = np.asarray(indices, dtype=np.int64)
        return DissimilarityMatrix(self.entries[np.ix_(indices, indices)])


@dataclass(frozen=True)
class Codebook:
    """n prototypes, either real vectors or indices into the dataset.

    Use :meth:`from_vectors` / :meth:`from_indices` rather than the raw
    constructor.
    """

    mode: str
    vectors: Optional[np.ndarray] = None
    indices: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.mode == VECTOR:
            if self.vectors is None:
                raise InvalidInputError("vector codebook needs vectors")
            vectors = np.asarray(self.vectors, dtype=float)
            if vectors.ndim != 2 or vectors.shape[0] < 1 or vectors.shape[1] < 1:
                raise InvalidInputError(
                    f"prototype vectors must be an n x m array, got shape {vectors.shape}")
            object.__setattr__(self, "vectors", _frozen(vectors))
        elif self.mode == MEDIAN:
            if self.indices is None:
                raise InvalidInputError("median codebook needs indices")
            indices = np.asarray(self.indices)
            if indices.ndim != 1 or indices.size < 1:
                raise InvalidInputError("median codebook needs a non-empty index list")
            if np.any(indices < 0):
                raise InvalidInputError("prototype indices must be nonnegative")
            object.__setattr__(self, "indices", _frozen(indices, dtype=np.int64))
        else:
            raise InvalidInputError(f"unknown codebook mode {self.mode!r}")

    @classmethod
    def from_vectors(cls, vectors) -> "Codebook":
        return cls(VECTOR, vectors=vectors)

    @classmethod
    def from_indices(cls, indices) -> "Codebook":
        return cls(MEDIAN, indices=indices)

    @property
    def n(self) -> int:
        return len(self.vectors) if self.mode == VECTOR else len(self.indices)

    def check_against(self, p: int) -> None:
        """Median mode: every index must lie in [0, p)."""
        if self.mode == MEDIAN and np.any(self.indices >= p):
            raise InvalidInputError(
                f"prototype index {int(self.indices.max())} out of range for p={p}")

    def __eq__(self, other):
        if not isinstance(other, Codebook) or other.mode != self.mode:
            return NotImplemented
        if self.mode == VECTOR:
            return np.array_equal(self.vectors, other.vectors)
        return np.array_equal(self.indices, other.indices)

    __hash__ = None


NG_FORM = "ng"
WINNER_FORM = "winner"


@dataclass(frozen=True)
class RankAssignment:
    """Hidden variables k_ij, stored as a p x n integer matrix.

    ``form`` is ``"ng"`` when every row is a permutation of 0..n-1 and
    ``"winner"`` when every row is one-hot (0 for the winner, 1 elsewhere).
    """

    ranks: np.ndarray
    form: str = NG_FORM

    def __post_init__(self):
        ranks = np.asarray(self.ranks, dtype=np.int64)
        if ranks.ndim != 2:
            raise InvalidInputError("ranks must be a p x n matrix")
        n = ranks.shape[1]
        if self.form == NG_FORM:
            if not np.array_equal(np.sort(ranks, axis=1),
                                  np.broadcast_to(np.arange(n), ranks.shape)):
                raise InvalidInputError("NG ranks must be permutations of 0..n-1")
        elif self.form == WINNER_FORM:
            if not (np.all((ranks == 0) | (ranks == 1)) and np.all((ranks == 0).sum(axis=1) == 1)):
                raise InvalidInputError("winner ranks need exactly one 0 per row, rest 1")
        else:
            raise InvalidInputError(f"unknown rank form {self.form!r}")
        object.__setattr__(self, "ranks", _frozen(ranks, dtype=np.int64))

    @classmethod
    def from_winners(cls, winners, n: int) -> "RankAssignment":
        winners = np.asarray(winners, dtype=np.int64)
        ranks = np.ones((len(winners), n), dtype=np.int64)
        ranks[np.arange(len(winners)), winners] = 0
        return cls(ranks, WINNER_FORM)

    @property
    def winners(self) -> np.ndarray:
        return np.argmin(self.ranks, axis=1)


@dataclass(frozen=True)
class SomLattice:
    """Rectangular rows x cols grid; neuron i sits at (i // cols, i % cols)."""

    rows: int
    cols: int
    coordinates: np.ndarray = field(init=False, repr=False)
    distances: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise InvalidParameterError("lattice sides must be positive")
        idx = np.arange(self.rows * self.cols)
        coords = np.stack([idx // self.cols, idx % self.cols], axis=1)
        dist = np.abs(coords[:, None, :] - coords[None, :, :]).sum(axis=2)
        object.__setattr__(self, "coordinates", _frozen(coords, dtype=np.int64))
        object.__setattr__(self, "distances", _frozen(dist, dtype=np.int64))

    @property
    def n(self) -> int:
        return self.rows * self.cols


def make_lattice(n: int) -> SomLattice:
    """Square lattice with side round(sqrt(n)); the result may hold != n neurons."""
    if n < 1:
        raise InvalidParameterError(f"need at least one neuron, got {n}")
    side = max(1, int(math.floor(math.sqrt(n) + 0.5)))
    return SomLattice(side, side)


def lattice_distance(lattice: SomLattice, i: int, l: int) -> int:
    """Manhattan distance between the grid positions of neurons i and l."""
    return int(lattice.distances[i, l])


def neighborhood_weight(t, lam: float):
    """h_lambda(t) = exp(-t / lambda); accepts scalars or arrays for t."""
    if not lam > 0:
        raise InvalidParameterError(f"neighborhood range must be positive, got {lam}")
    return np.exp(-np.asarray(t, dtype=float) / lam)


@dataclass(frozen=True)
class AnnealingSchedule:
    """Geometric interpolation from lambda_start (epoch 0) to lambda_final (last epoch).

    ``epochs`` may be 0, which describes a run without any training epoch.
    """

    lambda_start: float
    lambda_final: float
    epochs: int

    def __post_init__(self):
        if not (self.lambda_start > 0 and self.lambda_final > 0):
            raise InvalidParameterError("schedule endpoints must be positive")
        if self.lambda_final > self.lambda_start:
            raise InvalidParameterError("lambda_final must not exceed lambda_start")
        if self.epochs < 0:
            raise InvalidParameterError("epochs must be nonnegative")

    def __call__(self, t: int) -> float:
        return lambda_at(self, t)

    def values(self) -> np.ndarray:
        return np.array([lambda_at(self, t) for t in range(self.epochs)])


def lambda_at(schedule: AnnealingSchedule, t: int) -> float:
    if not 0 <= t < schedule.epochs:
        raise InvalidParameterError(f"epoch {t} outside [0, {schedule.epochs})")
    if schedule.epochs == 1 or schedule.lambda_start == schedule.lambda_final:
        return float(schedule.lambda_start)
    if t == schedule.epochs - 1:
        return float(schedule.lambda_final)
    ratio = schedule.lambda_final / schedule.lambda_start
    return float(schedule.lambda_start * ratio ** (t / (schedule.epochs - 1)))


def as_points(data) -> np.ndarray:
    if isinstance(data, VectorDataset):
        return data.points
    return VectorDataset(data).points


def check_dimensions(points: np.ndarray, codebook: Codebook) -> None:
    if codebook.mode != VECTOR:
        raise InvalidInputError("operation requires a vector-mode codebook")
    if codebook.vectors.shape[1] != points.shape[-1]:
        raise InvalidInputError(
            f"dimension mismatch: data m={points.shape[-1]}, "
            f"prototypes m={codebook.vectors.shape[1]}")


__all__ = [
    "VECTOR", "MEDIAN", "VectorDataset", "DissimilarityMatrix", "validate_matrix",
    "Codebook", "RankAssignment", "NG_FORM", "WINNER_FORM", "SomLattice",
    "make_lattice", "lattice_distance", "neighborhood_weight",
    "AnnealingSchedule", "lambda_at",
]
