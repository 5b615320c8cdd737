"""Dissimilarity measures and pairwise matrix construction.

The edit distances cover the two sequence settings used with median
clustering: density profiles over {1..6} (substitution |x-y|, indel 4.5)
and contour angle sequences compared up to rotation and mirroring
(substitution |x-y|, indel 60).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .exceptions import InvalidInputError, InvalidMetricError
from .model import DissimilarityMatrix


def squared_euclidean(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise InvalidInputError(f"dimension mismatch: {x.shape} vs {y.shape}")
    diff = x - y
    return float(np.dot(diff.ravel(), diff.ravel()))


def absolute_difference(a, b) -> float:
    return abs(float(a) - float(b))


@dataclass(frozen=True)
class AlignmentCosts:
    """Substitution cost function plus a constant insertion/deletion cost."""

    substitution: Callable[[object, object], float]
    indel: float

    def __post_init__(self):
        if not self.indel > 0:
            raise InvalidInputError(f"indel cost must be positive, got {self.indel}")


CHROMOSOME_COSTS = AlignmentCosts(absolute_difference, 4.5)
SILHOUETTE_COSTS = AlignmentCosts(absolute_difference, 60.0)


def edit_distance(a: Sequence, b: Sequence, costs: AlignmentCosts = CHROMOSOME_COSTS) -> float:
    """Minimal alignment cost between two sequences (Needleman-Wunsch style DP)."""
    sub = costs.substitution
    indel = costs.indel
    # prev[j] holds the cost of aligning a[:i-1] with b[:j]
    prev = [j * indel for j in range(len(b) + 1)]
    for i in range(1, len(a) + 1):
        ai = a[i - 1]
        cur = [i * indel] + [0.0] * len(b)
        for j in range(1, len(b) + 1):
            cur[j] = min(prev[j - 1] + sub(ai, b[j - 1]),
                         prev[j] + indel,
                         cur[j - 1] + indel)
        prev = cur
    return float(prev[-1])


def symmetric_edit_distance(a: Sequence, b: Sequence,
                            costs: AlignmentCosts = SILHOUETTE_COSTS) -> float:
    """Edit distance minimized over cyclic rotations of ``a`` and of reversed ``a``."""
    if len(a) == 0 or len(b) == 0:
        raise InvalidInputError("rotation-invariant edit distance needs non-empty sequences")
    a = list(a)
    b = list(b)
    best = np.inf
    for candidate in (a, a[::-1]):
        for shift in range(len(candidate)):
            rotated = candidate[shift:] + candidate[:shift]
            best = min(best, edit_distance(rotated, b, costs))
            if best == 0.0:
                return 0.0
    return float(best)


def pairwise_matrix(items: Sequence, metric: Callable[[object, object], float]
                    ) -> DissimilarityMatrix:
    """Evaluate ``metric`` on the upper triangle and mirror it."""
    p = len(items)
    if p < 1:
        raise InvalidInputError("need at least one item")
    entries = np.zeros((p, p))
    for i in range(p):
        for j in range(i + 1, p):
            value = float(metric(items[i], items[j]))
            if not value >= 0:
                raise InvalidMetricError(
                    f"metric returned {value!r} for items ({i},{j})")
            entries[i, j] = entries[j, i] = value
    return DissimilarityMatrix(entries)


def squared_euclidean_matrix(points) -> DissimilarityMatrix:
    """Vectorized pairwise squared Euclidean distances of the rows of ``points``."""
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    diff = points[:, None, :] - points[None, :, :]
    return DissimilarityMatrix(np.einsum("ijk,ijk->ij", diff, diff))
