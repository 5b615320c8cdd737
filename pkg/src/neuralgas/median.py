"""Generalized-median NG, SOM and k-means for pairwise dissimilarity data.

Prototypes are indices into the data set. The assignment step reads the
matrix columns of the current prototypes; the update step replaces every
prototype by the data point minimizing its weighted sum of dissimilarities.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .batch import (
    EpochRecord,
    TrainingTrace,
    heskes_winners_from_distances,
    kmeans_cost_from_distances,
    ng_cost_from_distances,
    prototype_weights,
    ranks_from_distances,
    som_cost_from_distances,
    winners_from_distances,
)
from .exceptions import InvalidConfigurationError, InvalidInputError, InvalidParameterError
from .model import (
    MEDIAN,
    AnnealingSchedule,
    Codebook,
    DissimilarityMatrix,
    RankAssignment,
    SomLattice,
    lambda_at,
    make_lattice,
)

logger = logging.getLogger(__name__)

ALGORITHMS = ("median-ng", "median-som", "median-kmeans")


@dataclass(frozen=True)
class MedianConfig:
    """Options for :func:`train_median`.

    jitter_scale
        Noise amplitude as a fraction of the median positive matrix entry,
        redrawn every epoch. 0 disables jitter.
    candidate_restriction
        Only consider receptive fields of neighboring prototypes (the
        prototype itself and its lattice or rank neighbors at distance 1)
        as median candidates.
    seed
        Seed for initialization and jitter.
    """

    jitter_scale: float = 1e-6
    candidate_restriction: bool = False
    seed: Optional[int] = None

    def __post_init__(self):
        if not self.jitter_scale >= 0:
            raise InvalidParameterError("jitter_scale must be nonnegative")


def _entries(matrix) -> np.ndarray:
    if isinstance(matrix, DissimilarityMatrix):
        return matrix.entries
    return np.asarray(matrix, dtype=float)


def _check_codebook(codebook: Codebook, p: int) -> None:
    if codebook.mode != MEDIAN:
        raise InvalidConfigurationError("median algorithms need a median-mode codebook")
    codebook.check_against(p)


def generalized_median(weights, matrix, candidates=None) -> int:
    """Index l minimizing sum_j weights[j] * d[j, l]; lowest index wins ties."""
    entries = _entries(matrix)
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (entries.shape[0],):
        raise InvalidInputError(f"expected {entries.shape[0]} weights, got {weights.shape}")
    if np.any(weights < 0) or not np.any(weights > 0):
        raise InvalidInputError("weights must be nonnegative with at least one positive")
    sums = weights @ entries
    if candidates is None:
        return int(np.argmin(sums))
    candidates = np.sort(np.asarray(candidates, dtype=np.int64))
    return int(candidates[np.argmin(sums[candidates])])


def _median_update(weights: np.ndarray, entries: np.ndarray,
                   candidates: Optional[list] = None) -> np.ndarray:
    """Weighted generalized median for each column of the p x n ``weights``."""
    sums = weights.T @ entries
    if candidates is None:
        return np.argmin(sums, axis=1)
    out = np.empty(weights.shape[1], dtype=np.int64)
    for i, cand in enumerate(candidates):
        out[i] = cand[np.argmin(sums[i, cand])]
    return out


def _candidate_sets(winners: np.ndarray, neighbors: np.ndarray,
                    current: np.ndarray) -> list:
    """Union of receptive fields of the neighbors of every prototype.

    ``neighbors`` is a boolean n x n matrix. The current location is always a
    candidate, so the update can never be worse than staying put.
    """
    return [np.union1d(np.flatnonzero(neighbors[i][winners]), [current[i]]).astype(np.int64)
            for i in range(neighbors.shape[0])]


def _rank_neighbors(entries: np.ndarray, indices: np.ndarray) -> np.ndarray:
    """Each prototype plus its nearest other prototype (rank distance <= 1)."""
    n = len(indices)
    between = entries[np.ix_(indices, indices)]
    neighbors = np.eye(n, dtype=bool)
    if n > 1:
        ranks = ranks_from_distances(between + np.diag(np.full(n, -np.inf)))
        neighbors |= ranks <= 1
        neighbors |= neighbors.T
    return neighbors


def _assignment_distances(entries, codebook, noise):
    distances = entries[:, codebook.indices]
    return distances if noise is None else distances + noise


def median_ng_epoch(matrix, codebook: Codebook, lam: float,
                    candidate_restriction: bool = False, noise=None):
    """One Median NG epoch.

    ``noise`` (p x n) is added to the point-to-prototype distances before
    ranking, see :func:`assignment_noise`.
    """
    entries = _entries(matrix)
    _check_codebook(codebook, entries.shape[0])
    distances = _assignment_distances(entries, codebook, noise)
    ranks = ranks_from_distances(distances)
    weights = prototype_weights(ranks, lam)
    candidates = None
    if candidate_restriction:
        candidates = _candidate_sets(np.argmin(ranks, axis=1),
                                     _rank_neighbors(entries, codebook.indices),
                                     codebook.indices)
    new = _median_update(weights, entries, candidates)
    return Codebook.from_indices(new), RankAssignment(ranks)


def median_som_epoch(matrix, codebook: Codebook, lattice: SomLattice, lam: float,
                     candidate_restriction: bool = False, noise=None):
    entries = _entries(matrix)
    _check_codebook(codebook, entries.shape[0])
    if lattice is None or codebook.n != lattice.n:
        raise InvalidConfigurationError("median SOM needs a lattice matching the codebook")
    distances = _assignment_distances(entries, codebook, noise)
    winners = heskes_winners_from_distances(distances, lattice, lam)
    weights = prototype_weights(lattice.distances[winners], lam)
    candidates = None
    if candidate_restriction:
        candidates = _candidate_sets(winners, lattice.distances <= 1,
                                     codebook.indices)
    new = _median_update(weights, entries, candidates)
    return Codebook.from_indices(new), RankAssignment.from_winners(winners, codebook.n)


def median_kmeans_epoch(matrix, codebook: Codebook, candidate_restriction: bool = False,
                        noise=None):
    """Generalized median of each receptive field; empty fields keep their prototype."""
    entries = _entries(matrix)
    _check_codebook(codebook, entries.shape[0])
    distances = _assignment_distances(entries, codebook, noise)
    winners = winners_from_distances(distances)
    n = codebook.n
    candidates = None
    if candidate_restriction:
        candidates = _candidate_sets(winners, _rank_neighbors(entries, codebook.indices),
                                     codebook.indices)
    new = np.array(codebook.indices)
    for i in range(n):
        members = winners == i
        if members.any():
            new[i] = generalized_median(members.astype(float), entries,
                                        None if candidates is None else candidates[i])
    return Codebook.from_indices(new), RankAssignment.from_winners(winners, n)


def median_cost(algorithm: str, matrix, codebook: Codebook, lam: float = 1.0,
                lattice: Optional[SomLattice] = None) -> float:
    """Cost the given median algorithm descends, evaluated on matrix entries."""
    entries = _entries(matrix)
    _check_codebook(codebook, entries.shape[0])
    distances = entries[:, codebook.indices]
    if algorithm == "median-ng":
        return ng_cost_from_distances(distances, lam)
    if algorithm == "median-som":
        if lattice is None:
            raise InvalidConfigurationError("median-som cost needs a lattice")
        return som_cost_from_distances(distances, lattice, lam)
    if algorithm == "median-kmeans":
        return kmeans_cost_from_distances(distances)
    raise InvalidConfigurationError(f"unknown median algorithm {algorithm!r}")


def jitter(matrix: DissimilarityMatrix, scale: float,
           rng: np.random.Generator) -> DissimilarityMatrix:
    """Add mirrored uniform noise in [0, scale * median positive entry] off the diagonal."""
    if not scale >= 0:
        raise InvalidParameterError("jitter scale must be nonnegative")
    entries = _entries(matrix)
    positive = entries[entries > 0]
    if scale == 0 or positive.size == 0:
        return matrix if isinstance(matrix, DissimilarityMatrix) else DissimilarityMatrix(entries)
    amplitude = scale * float(np.median(positive))
    p = entries.shape[0]
    noise = np.triu(rng.uniform(0.0, amplitude, size=(p, p)), k=1)
    return DissimilarityMatrix(entries + noise + noise.T)


def assignment_noise(matrix, n: int, scale: float, rng: np.random.Generator):
    """Independent uniform noise in [0, scale * median positive entry] per (point, prototype).

    Matrix-level jitter cannot separate prototypes that sit on the same data
    point, since they read the same matrix column; perturbing each
    prototype's column separately can.
    """
    entries = _entries(matrix)
    positive = entries[entries > 0]
    if scale == 0 or positive.size == 0:
        return None
    amplitude = scale * float(np.median(positive))
    return rng.uniform(0.0, amplitude, size=(entries.shape[0], n))


def epoch(algorithm: str, matrix, codebook: Codebook, lam: float,
          lattice: Optional[SomLattice] = None, candidate_restriction: bool = False,
          noise=None):
    """Dispatch one epoch of the named median algorithm."""
    if algorithm == "median-ng":
        return median_ng_epoch(matrix, codebook, lam, candidate_restriction, noise)
    if algorithm == "median-som":
        return median_som_epoch(matrix, codebook, lattice, lam, candidate_restriction, noise)
    if algorithm == "median-kmeans":
        return median_kmeans_epoch(matrix, codebook, candidate_restriction, noise)
    raise InvalidConfigurationError(
        f"unknown median algorithm {algorithm!r}; expected one of {ALGORITHMS}")


def train_median(algorithm: str, matrix: DissimilarityMatrix, n: int,
                 schedule: AnnealingSchedule, config: MedianConfig = MedianConfig(), *,
                 init: Optional[Codebook] = None, keep_codebooks: bool = False):
    """Train a median algorithm; returns the final codebook and its trace.

    ``median-som`` uses ``make_lattice(n)`` neurons. Each epoch draws fresh
    jitter for the matrix (median step) and for every prototype's distance
    column (assignment step). Training stops early once
    the remaining schedule is constant and an unjittered epoch has left the
    codebook unchanged twice in a row; ``trace.converged_epoch`` is set then.
    Costs in the trace are always evaluated on the unjittered matrix.
    """
    if algorithm not in ALGORITHMS:
        raise InvalidConfigurationError(
            f"unknown median algorithm {algorithm!r}; expected one of {ALGORITHMS}")
    if not isinstance(matrix, DissimilarityMatrix):
        matrix = DissimilarityMatrix(matrix)
    p = matrix.size
    lattice = make_lattice(n) if algorithm == "median-som" else None
    n_eff = lattice.n if lattice is not None else n
    if n_eff > p:
        raise InvalidConfigurationError(f"{n_eff} prototypes requested but only {p} data points")
    rng = np.random.default_rng(config.seed)
    if init is None:
        codebook = Codebook.from_indices(np.sort(rng.choice(p, size=n_eff, replace=False)))
    else:
        codebook = init
        if codebook.n != n_eff:
            raise InvalidConfigurationError(
                f"initial codebook has {codebook.n} prototypes, expected {n_eff}")
    _check_codebook(codebook, p)

    trace = TrainingTrace()
    stable = 0
    for t in range(schedule.epochs):
        lam = lambda_at(schedule, t)
        previous = codebook
        noisy = jitter(matrix, config.jitter_scale, rng)
        noise = assignment_noise(matrix, codebook.n, config.jitter_scale, rng)
        codebook, _ = epoch(algorithm, noisy, codebook, lam, lattice,
                            config.candidate_restriction, noise)
        cost = median_cost(algorithm, matrix, codebook, lam, lattice)
        trace.append(EpochRecord(t, lam, cost, codebook if keep_codebooks else None))

        if lam != schedule.lambda_final and t != schedule.epochs - 1:
            continue
        probe_fixed = codebook == previous
        if probe_fixed and config.jitter_scale > 0:
            probe, _ = epoch(algorithm, matrix, previous, lam, lattice,
                             config.candidate_restriction)
            probe_fixed = probe == previous
        stable = stable + 1 if probe_fixed else 0
        if stable >= 2:
            trace.converged_epoch = t
            logger.debug("%s reached a fixed point at epoch %d", algorithm, t)
            break
    return codebook, trace


def is_fixed_point(algorithm: str, matrix, codebook: Codebook, lam: float,
                   lattice: Optional[SomLattice] = None) -> bool:
    new, _ = epoch(algorithm, matrix, codebook, lam, lattice)
    return new == codebook
