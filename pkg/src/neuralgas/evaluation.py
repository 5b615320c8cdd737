"""Quantization error and posterior-labeling classification.

Every function accepts either vector data (a :class:`VectorDataset` or an
array of points) with a vector codebook, or a :class:`DissimilarityMatrix`
with a median codebook. In median mode the optional ``subset`` selects the
matrix rows to evaluate, e.g. the test indices of a split; prototype indices
always refer to the full matrix.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .batch import prototype_distances
from .exceptions import InvalidConfigurationError, InvalidInputError
from .model import MEDIAN, VECTOR, Codebook, DissimilarityMatrix, VectorDataset

UNLABELED = None


def winner_distances(data, codebook: Codebook, subset=None) -> np.ndarray:
    """Distances from each evaluated point to every prototype (rows x n)."""
    if isinstance(data, DissimilarityMatrix):
        if codebook.mode != MEDIAN:
            raise InvalidConfigurationError("a dissimilarity matrix needs a median codebook")
        codebook.check_against(data.size)
        rows = data.entries if subset is None else data.entries[np.asarray(subset, dtype=np.int64)]
        return rows[:, codebook.indices]
    if codebook.mode != VECTOR:
        raise InvalidConfigurationError("vector data needs a vector codebook")
    points = data.points if isinstance(data, VectorDataset) else VectorDataset(data).points
    if subset is not None:
        points = points[np.asarray(subset, dtype=np.int64)]
    if points.shape[1] != codebook.vectors.shape[1]:
        raise InvalidInputError("dimension mismatch between data and prototypes")
    return prototype_distances(points, codebook.vectors)


def winners(data, codebook: Codebook, subset=None) -> np.ndarray:
    """Nearest prototype per point; the lowest index wins ties."""
    return np.argmin(winner_distances(data, codebook, subset), axis=1)


def quantization_error(data, codebook: Codebook, subset=None) -> float:
    """Mean distance of the points to their winning prototype."""
    distances = winner_distances(data, codebook, subset)
    return float(np.mean(np.min(distances, axis=1)))


@dataclass(frozen=True)
class LabeledCodebook:
    codebook: Codebook
    prototype_labels: Tuple[Optional[int], ...]

    def __post_init__(self):
        if len(self.prototype_labels) != self.codebook.n:
            raise InvalidInputError("need exactly one label (or UNLABELED) per prototype")


def _majority(labels) -> int:
    counts = Counter(int(v) for v in labels)
    best = max(counts.values())
    return min(label for label, count in counts.items() if count == best)


def posterior_labels(codebook: Codebook, data, labels, subset=None) -> LabeledCodebook:
    """Majority label of each receptive field (smallest label on ties)."""
    won = winners(data, codebook, subset)
    labels = np.asarray(labels)
    if labels.shape != won.shape:
        raise InvalidInputError(f"expected {len(won)} labels, got {labels.shape}")
    assigned = []
    for i in range(codebook.n):
        field_labels = labels[won == i]
        assigned.append(_majority(field_labels) if field_labels.size else UNLABELED)
    return LabeledCodebook(codebook, tuple(assigned))


def classify(labeled: LabeledCodebook, data, subset=None) -> list:
    won = winners(data, labeled.codebook, subset)
    return [labeled.prototype_labels[i] for i in won]


def classification_error(labeled: LabeledCodebook, data, labels, subset=None) -> float:
    """Fraction of points whose winner carries a different (or no) label."""
    predicted = classify(labeled, data, subset)
    labels = np.asarray(labels)
    if labels.shape != (len(predicted),):
        raise InvalidInputError(f"expected {len(predicted)} labels, got {labels.shape}")
    wrong = sum(1 for guess, truth in zip(predicted, labels)
                if guess is UNLABELED or guess != int(truth))
    return wrong / len(predicted)
