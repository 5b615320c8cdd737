"""Vector-space prototype algorithms: online NG, Batch NG, Batch SOM and batch k-means.

Every batch epoch is a two-step update. The assignment step (ranks or
winners) uses the incoming codebook for all data points, then all
prototypes are recomputed simultaneously. Distance ties are broken by the
lower prototype index throughout, so assignments are unique.

The ``*_from_distances`` helpers work on a p x n matrix of point-to-prototype
distances and are shared with the median variants.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .exceptions import InvalidConfigurationError, InvalidParameterError
from .model import (
    VECTOR,
    AnnealingSchedule,
    Codebook,
    RankAssignment,
    SomLattice,
    VectorDataset,
    as_points,
    check_dimensions,
    lambda_at,
    make_lattice,
    neighborhood_weight,
)

logger = logging.getLogger(__name__)

ALGORITHMS = ("online-ng", "batch-ng", "batch-som", "batch-kmeans")
INIT_RANGE = 0.05


# -- assignment and cost kernels on point-to-prototype distances -------------

def prototype_distances(points: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """p x n squared Euclidean distances, computed from explicit differences."""
    diff = points[:, None, :] - vectors[None, :, :]
    return np.einsum("pnm,pnm->pn", diff, diff)


def ranks_from_distances(distances: np.ndarray) -> np.ndarray:
    """Rank of every prototype per row; a stable sort breaks ties by index."""
    order = np.argsort(distances, axis=1, kind="stable")
    ranks = np.empty_like(order)
    rows = np.arange(distances.shape[0])[:, None]
    ranks[rows, order] = np.arange(distances.shape[1])
    return ranks


def winners_from_distances(distances: np.ndarray) -> np.ndarray:
    # np.argmin returns the first minimum, i.e. the lowest index on ties
    return np.argmin(distances, axis=1)


def heskes_winners_from_distances(distances: np.ndarray, lattice: SomLattice,
                                  lam: float) -> np.ndarray:
    """argmin_i sum_l h(nd(i,l)) d(x, w^l) for every row of ``distances``."""
    kernel = neighborhood_weight(lattice.distances, lam)
    # Accumulate each neuron's terms nearest-first on the lattice. Symmetric
    # neurons then add identical terms in identical order, so coinciding
    # prototypes tie exactly and the index tie-break applies.
    order = np.argsort(lattice.distances, axis=1, kind="stable")
    rows = np.arange(kernel.shape[0])
    scores = np.zeros_like(distances)
    for r in range(kernel.shape[1]):
        cols = order[:, r]
        scores += distances[:, cols] * kernel[rows, cols]
    return np.argmin(scores, axis=1)


def ng_cost_from_distances(distances: np.ndarray, lam: float) -> float:
    ranks = ranks_from_distances(distances)
    return float(np.sum(neighborhood_weight(ranks, lam) * distances))


def som_cost_from_distances(distances: np.ndarray, lattice: SomLattice, lam: float) -> float:
    winners = heskes_winners_from_distances(distances, lattice, lam)
    kernel = neighborhood_weight(lattice.distances, lam)
    return float(np.sum(kernel[winners] * distances))


def kmeans_cost_from_distances(distances: np.ndarray) -> float:
    return float(np.sum(np.min(distances, axis=1)))


def _check_lattice(codebook: Codebook, lattice: SomLattice) -> None:
    if codebook.n != lattice.n:
        raise InvalidConfigurationError(
            f"codebook has {codebook.n} prototypes but lattice has {lattice.n} neurons")


def _prepare(data, codebook: Codebook) -> np.ndarray:
    points = as_points(data)
    check_dimensions(points, codebook)
    return points


# -- single-point operations --------------------------------------------------

def compute_ranks(x, codebook: Codebook) -> np.ndarray:
    """Rank row of length n for a single point ``x``."""
    x = np.asarray(x, dtype=float).reshape(1, -1)
    check_dimensions(x, codebook)
    return ranks_from_distances(prototype_distances(x, codebook.vectors))[0]


def heskes_winner(x, codebook: Codebook, lattice: SomLattice, lam: float) -> int:
    x = np.asarray(x, dtype=float).reshape(1, -1)
    check_dimensions(x, codebook)
    _check_lattice(codebook, lattice)
    return int(heskes_winners_from_distances(
        prototype_distances(x, codebook.vectors), lattice, lam)[0])


def online_ng_step(x, codebook: Codebook, lam: float, epsilon: float) -> Codebook:
    """One stochastic NG update: w^i += eps * h(k_i) * (x - w^i)."""
    if not 0 <= epsilon <= 1:
        raise InvalidParameterError(f"learning rate must lie in [0, 1], got {epsilon}")
    x = np.asarray(x, dtype=float).reshape(1, -1)
    check_dimensions(x, codebook)
    return Codebook.from_vectors(_online_update(x[0], codebook.vectors, lam, epsilon))


def _online_update(x: np.ndarray, vectors: np.ndarray, lam: float, epsilon: float):
    ranks = ranks_from_distances(prototype_distances(x[None, :], vectors))[0]
    step = epsilon * neighborhood_weight(ranks, lam)[:, None]
    return vectors + step * (x[None, :] - vectors)


# -- batch epochs -------------------------------------------------------------

def prototype_weights(levels: np.ndarray, lam: float) -> np.ndarray:
    """h_lambda(levels) rescaled per prototype (column) so its largest weight is 1.

    ``levels`` is p x n (ranks, or lattice distances to the winner). The
    per-column factor cancels in every weighted mean and weighted argmin,
    but keeps the normalizers >= 1 where exp(-k/lambda) would underflow.
    """
    levels = np.asarray(levels, dtype=float)
    return neighborhood_weight(levels - levels.min(axis=0, keepdims=True), lam)


def _weighted_means(weights: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Rows of weights.T @ points normalized by the column sums of ``weights``."""
    return (weights.T @ points) / weights.sum(axis=0)[:, None]


def batch_ng_epoch(data, codebook: Codebook, lam: float):
    """Returns the new codebook and the ranks computed from the incoming one."""
    points = _prepare(data, codebook)
    ranks = ranks_from_distances(prototype_distances(points, codebook.vectors))
    weights = prototype_weights(ranks, lam)
    return Codebook.from_vectors(_weighted_means(weights, points)), RankAssignment(ranks)


def batch_som_epoch(data, codebook: Codebook, lattice: SomLattice, lam: float):
    points = _prepare(data, codebook)
    _check_lattice(codebook, lattice)
    distances = prototype_distances(points, codebook.vectors)
    winners = heskes_winners_from_distances(distances, lattice, lam)
    weights = prototype_weights(lattice.distances[winners], lam)
    new = Codebook.from_vectors(_weighted_means(weights, points))
    return new, RankAssignment.from_winners(winners, codebook.n)


def batch_kmeans_epoch(data, codebook: Codebook):
    """Receptive-field means; prototypes with an empty field stay where they are."""
    points = _prepare(data, codebook)
    winners = winners_from_distances(prototype_distances(points, codebook.vectors))
    vectors = np.array(codebook.vectors)
    for i in range(codebook.n):
        members = winners == i
        if members.any():
            vectors[i] = points[members].mean(axis=0)
    return Codebook.from_vectors(vectors), RankAssignment.from_winners(winners, codebook.n)


# -- costs ---------------------------------------------------------------------

def ng_cost(data, codebook: Codebook, lam: float) -> float:
    """Unnormalized NG cost sum_ij h(k_ij) d(x^j, w^i)."""
    points = _prepare(data, codebook)
    return ng_cost_from_distances(prototype_distances(points, codebook.vectors), lam)


def som_cost(data, codebook: Codebook, lattice: SomLattice, lam: float) -> float:
    points = _prepare(data, codebook)
    _check_lattice(codebook, lattice)
    return som_cost_from_distances(prototype_distances(points, codebook.vectors), lattice, lam)


def kmeans_cost(data, codebook: Codebook) -> float:
    """Summed (not averaged) distance of every point to its nearest prototype."""
    points = _prepare(data, codebook)
    return kmeans_cost_from_distances(prototype_distances(points, codebook.vectors))


def ng_gradient(data, codebook: Codebook, lam: float) -> np.ndarray:
    """Jacobian of the NG cost for fixed ranks: 2 sum_j h(k_ij) (w^i - x^j)."""
    points = _prepare(data, codebook)
    ranks = ranks_from_distances(prototype_distances(points, codebook.vectors))
    weights = neighborhood_weight(ranks, lam)
    return 2.0 * (weights.sum(axis=0)[:, None] * codebook.vectors - weights.T @ points)


def newton_step(data, codebook: Codebook, lam: float) -> np.ndarray:
    """Newton update -J H^{-1} of the NG cost with the diagonal Hessian 2 sum_j h(k_ij).

    Adding the result to the codebook reproduces :func:`batch_ng_epoch`.
    """
    points = _prepare(data, codebook)
    ranks = ranks_from_distances(prototype_distances(points, codebook.vectors))
    # J and H share the per-prototype rescaling, so -J/H is unchanged by it
    weights = prototype_weights(ranks, lam)
    jacobian = 2.0 * (weights[:, :, None] * (codebook.vectors[None, :, :]
                                              - points[:, None, :])).sum(axis=0)
    hessian_diag = 2.0 * weights.sum(axis=0)
    return -jacobian / hessian_diag[:, None]


# -- training loop ---------------------------------------------------------------

@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    lam: float
    cost: float
    codebook: Optional[Codebook] = None


@dataclass
class TrainingTrace:
    """One record per completed epoch."""

    records: List[EpochRecord] = field(default_factory=list)
    converged_epoch: Optional[int] = None

    def append(self, record: EpochRecord) -> None:
        self.records.append(record)

    @property
    def costs(self) -> np.ndarray:
        return np.array([r.cost for r in self.records])

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([r.lam for r in self.records])

    def __len__(self):
        return len(self.records)


def geometric_rate(start: float, final: float, epochs: int, t: int) -> float:
    if epochs <= 1:
        return float(start)
    if t == epochs - 1:
        return float(final)
    return float(start * (final / start) ** (t / (epochs - 1)))


def initial_codebook(algorithm: str, points: np.ndarray, n: int,
                     rng: np.random.Generator) -> Codebook:
    """k-means starts from distinct data points, the others from small random values."""
    if algorithm == "batch-kmeans":
        p = points.shape[0]
        idx = rng.choice(p, size=n, replace=n > p)
        return Codebook.from_vectors(points[idx])
    return Codebook.from_vectors(rng.uniform(-INIT_RANGE, INIT_RANGE, size=(n, points.shape[1])))


def train(algorithm: str, data: VectorDataset, n: int, schedule: AnnealingSchedule,
          seed=None, *, init: Optional[Codebook] = None, epsilon_start: float = 0.5,
          epsilon_final: float = 0.005, keep_codebooks: bool = False):
    """Run ``schedule.epochs`` epochs of the chosen vector algorithm.

    For ``batch-som`` the prototypes live on ``make_lattice(n)``, so the
    effective number of prototypes is round(sqrt(n))**2. Online NG visits
    the data in a fresh random order every epoch and anneals its learning
    rate geometrically from ``epsilon_start`` to ``epsilon_final``.

    Returns the final codebook and a :class:`TrainingTrace` whose costs are
    evaluated on the updated codebook with that epoch's lambda.
    """
    if algorithm not in ALGORITHMS:
        raise InvalidConfigurationError(
            f"unknown vector algorithm {algorithm!r}; expected one of {ALGORITHMS}")
    if n < 1:
        raise InvalidConfigurationError("need at least one prototype")
    points = as_points(data)
    rng = np.random.default_rng(seed)
    lattice = make_lattice(n) if algorithm == "batch-som" else None
    n_eff = lattice.n if lattice is not None else n

    codebook = init if init is not None else initial_codebook(algorithm, points, n_eff, rng)
    if codebook.mode != VECTOR:
        raise InvalidConfigurationError(f"{algorithm} needs a vector-mode codebook")
    check_dimensions(points, codebook)
    if lattice is not None and codebook.n != lattice.n:
        raise InvalidConfigurationError(
            f"initial codebook has {codebook.n} prototypes, lattice needs {lattice.n}")

    trace = TrainingTrace()
    for t in range(schedule.epochs):
        lam = lambda_at(schedule, t)
        if algorithm == "batch-ng":
            codebook, _ = batch_ng_epoch(points, codebook, lam)
            cost = ng_cost(points, codebook, lam)
        elif algorithm == "batch-som":
            codebook, _ = batch_som_epoch(points, codebook, lattice, lam)
            cost = som_cost(points, codebook, lattice, lam)
        elif algorithm == "batch-kmeans":
            codebook, _ = batch_kmeans_epoch(points, codebook)
            cost = kmeans_cost(points, codebook)
        else:
            eps = geometric_rate(epsilon_start, epsilon_final, schedule.epochs, t)
            vectors = np.array(codebook.vectors)
            for j in rng.permutation(points.shape[0]):
                vectors = _online_update(points[j], vectors, lam, eps)
            codebook = Codebook.from_vectors(vectors)
            cost = ng_cost(points, codebook, lam)
        trace.append(EpochRecord(t, lam, cost, codebook if keep_codebooks else None))
        logger.debug("%s epoch %d lambda=%.4g cost=%.6g", algorithm, t, lam, cost)
    return codebook, trace
