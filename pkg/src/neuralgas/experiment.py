"""Experiment orchestration: load, normalize, train per seed, evaluate, report."""
from __future__ import annotations

import datetime
import json
import logging
import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence, Union

import numpy as np

from . import batch, median
from .data import load_indices, load_labels, load_matrix, load_points, z_transform
from .evaluation import classification_error, posterior_labels, quantization_error, winners
from .exceptions import InvalidConfigurationError
from .model import AnnealingSchedule, Codebook, VectorDataset, make_lattice

logger = logging.getLogger(__name__)

VECTOR_ALGORITHMS = batch.ALGORITHMS
MEDIAN_ALGORITHMS = median.ALGORITHMS
NG_VARIANTS = ("online-ng", "batch-ng", "median-ng")
SOM_VARIANTS = ("batch-som", "median-som")


@dataclass
class ExperimentConfig:
    algorithm: str
    mode: Optional[str] = None
    n: int = 10
    epochs: int = 100
    lambda_start: Union[str, float] = "auto"
    lambda_final: float = 0.01
    epsilon_start: float = 0.5
    epsilon_final: float = 0.005
    seeds: Sequence[int] = (0,)
    points: Optional[str] = None
    test_points: Optional[str] = None
    matrix: Optional[str] = None
    labels: Optional[str] = None
    test_labels: Optional[str] = None
    label_column: bool = False
    split: Union[None, float, str] = None
    jitter_scale: float = 1e-6
    candidate_restriction: bool = False
    out: Optional[str] = None

    def __post_init__(self):
        if self.mode is None:
            self.mode = "median" if self.algorithm in MEDIAN_ALGORITHMS else "vector"
        self.seeds = tuple(int(s) for s in self.seeds)

    def validate(self) -> None:
        known = VECTOR_ALGORITHMS + MEDIAN_ALGORITHMS
        if self.algorithm not in known:
            raise InvalidConfigurationError(f"unknown algorithm {self.algorithm!r}; "
                                            f"expected one of {', '.join(known)}")
        expected = "median" if self.algorithm in MEDIAN_ALGORITHMS else "vector"
        if self.mode != expected:
            raise InvalidConfigurationError(
                f"algorithm {self.algorithm} runs in {expected} mode, not {self.mode}")
        if self.mode == "median":
            if not self.matrix:
                raise InvalidConfigurationError("median mode requires a matrix input")
            if self.points or self.test_points:
                raise InvalidConfigurationError("median mode does not read point files")
        else:
            if not self.points:
                raise InvalidConfigurationError("vector mode requires a points input")
            if self.matrix:
                raise InvalidConfigurationError("vector mode does not read a matrix")
            if self.test_points and self.split is not None:
                raise InvalidConfigurationError("give either a test file or a split, not both")
            if isinstance(self.split, str):
                raise InvalidConfigurationError(
                    "index-split files are for median mode; use a fraction in vector mode")
        if isinstance(self.split, float) and not 0 < self.split < 1:
            raise InvalidConfigurationError("split fraction must lie strictly in (0, 1)")
        if self.n < 1:
            raise InvalidConfigurationError("need at least one prototype")
        if self.epochs < 0:
            raise InvalidConfigurationError("epochs must be nonnegative")
        if not self.seeds:
            raise InvalidConfigurationError("need at least one seed")
        start = self.resolved_lambda_start()
        if not (self.lambda_final > 0 and start >= self.lambda_final):
            raise InvalidConfigurationError(
                f"need 0 < lambda_final <= lambda_start, got {self.lambda_final} / {start}")
        if not 0 < self.epsilon_final <= self.epsilon_start <= 1:
            raise InvalidConfigurationError("need 0 < epsilon_final <= epsilon_start <= 1")

    def effective_n(self) -> int:
        return make_lattice(self.n).n if self.algorithm in SOM_VARIANTS else self.n

    def resolved_lambda_start(self) -> float:
        if self.lambda_start != "auto":
            return float(self.lambda_start)
        if self.algorithm in NG_VARIANTS:
            return self.n / 2.0
        if self.algorithm in SOM_VARIANTS:
            return math.sqrt(self.effective_n()) / 2.0
        # k-means ignores lambda; keep the schedule well-formed
        return max(1.0, self.lambda_final)

    def schedule(self) -> AnnealingSchedule:
        return AnnealingSchedule(self.resolved_lambda_start(), self.lambda_final, self.epochs)


def _split_indices(p: int, fraction: float, seed: int):
    perm = np.random.default_rng([1, seed]).permutation(p)
    n_test = int(round(fraction * p))
    if n_test < 1 or n_test >= p:
        raise InvalidConfigurationError(f"split fraction {fraction} leaves an empty part of {p}")
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])


def _metrics(prefix: str, data, codebook: Codebook, labels, labeled, subset=None) -> dict:
    out = {f"{prefix}_quantization_error": quantization_error(data, codebook, subset)}
    if labeled is not None and labels is not None:
        out[f"{prefix}_classification_error"] = classification_error(
            labeled, data, labels, subset)
    return out


def _idle_prototypes(data, codebook: Codebook, subset=None) -> int:
    won = winners(data, codebook, subset)
    return int(codebook.n - len(np.unique(won)))


def _trace_rows(trace) -> list:
    return [{"epoch": r.epoch, "lambda": r.lam, "cost": r.cost} for r in trace.records]


def _vector_inputs(config: ExperimentConfig):
    data = load_points(config.points, label_column=config.label_column)
    if config.labels:
        data = VectorDataset(data.points, load_labels(config.labels))
    test = None
    if config.test_points:
        test = load_points(config.test_points, label_column=config.label_column)
        if config.test_labels:
            test = VectorDataset(test.points, load_labels(config.test_labels))
    return data, test


def _run_vector_seed(config, data, test, seed):
    if config.split is not None:
        train_idx, test_idx = _split_indices(data.p, float(config.split), seed)
        train_data, test = data.subset(train_idx), data.subset(test_idx)
    else:
        train_data = data
    train_data, transform = z_transform(train_data)
    if test is not None:
        test = transform.apply(test)

    codebook, trace = batch.train(config.algorithm, train_data, config.n, config.schedule(),
                                  seed=seed, epsilon_start=config.epsilon_start,
                                  epsilon_final=config.epsilon_final)
    labeled = None
    if train_data.labels is not None:
        labeled = posterior_labels(codebook, train_data, train_data.labels)
    metrics = _metrics("train", train_data, codebook, train_data.labels, labeled)
    metrics["train_idle_prototypes"] = _idle_prototypes(train_data, codebook)
    if test is not None:
        metrics.update(_metrics("test", test, codebook, test.labels, labeled))
    return {
        "seed": seed,
        "effective_n": codebook.n,
        "epochs_run": len(trace),
        "converged_epoch": trace.converged_epoch,
        "metrics": metrics,
        "prototypes": codebook.vectors.tolist(),
        "prototype_labels": None if labeled is None else list(labeled.prototype_labels),
        "trace": _trace_rows(trace),
    }


def _run_median_seed(config, matrix, labels, seed):
    p = matrix.size
    if isinstance(config.split, str):
        test_idx = np.sort(load_indices(config.split, p))
        train_idx = np.setdiff1d(np.arange(p), test_idx)
    elif config.split is not None:
        train_idx, test_idx = _split_indices(p, float(config.split), seed)
    else:
        train_idx, test_idx = np.arange(p), None
    if len(train_idx) == 0:
        raise InvalidConfigurationError("split leaves no training items")

    mconf = median.MedianConfig(config.jitter_scale, config.candidate_restriction, seed)
    local, trace = median.train_median(config.algorithm, matrix.submatrix(train_idx),
                                       config.n, config.schedule(), mconf)
    codebook = Codebook.from_indices(train_idx[local.indices])

    train_labels = None if labels is None else labels[train_idx]
    labeled = None
    if train_labels is not None:
        labeled = posterior_labels(codebook, matrix, train_labels, subset=train_idx)
    metrics = _metrics("train", matrix, codebook, train_labels, labeled, subset=train_idx)
    metrics["train_idle_prototypes"] = _idle_prototypes(matrix, codebook, subset=train_idx)
    if test_idx is not None and len(test_idx):
        test_labels = None if labels is None else labels[test_idx]
        metrics.update(_metrics("test", matrix, codebook, test_labels, labeled, subset=test_idx))
    return {
        "seed": seed,
        "effective_n": codebook.n,
        "epochs_run": len(trace),
        "converged_epoch": trace.converged_epoch,
        "metrics": metrics,
        "prototypes": codebook.indices.tolist(),
        "prototype_labels": None if labeled is None else list(labeled.prototype_labels),
        "receptive_fields": winners(matrix, codebook).tolist(),
        "trace": _trace_rows(trace),
    }


def _aggregate(runs: list) -> dict:
    names = sorted({k for run in runs for k in run["metrics"]})
    out = {}
    for name in names:
        values = np.array([run["metrics"][name] for run in runs if name in run["metrics"]],
                          dtype=float)
        out[name] = {"mean": float(values.mean()), "std": float(values.std())}
    return out


def _config_echo(config: ExperimentConfig) -> dict:
    echo = asdict(config)
    echo["seeds"] = list(config.seeds)
    echo["resolved_lambda_start"] = config.resolved_lambda_start()
    echo["effective_n"] = config.effective_n()
    return echo


def run_experiment(config: ExperimentConfig) -> dict:
    """Train once per seed and return the report as a JSON-serializable dict.

    All validation happens before any training starts. Apart from
    ``timestamp`` the report depends only on the config.
    """
    config.validate()
    if config.mode == "median":
        matrix = load_matrix(config.matrix)
        labels = load_labels(config.labels) if config.labels else None
        if labels is not None and len(labels) != matrix.size:
            raise InvalidConfigurationError(
                f"{len(labels)} labels for a {matrix.size}x{matrix.size} matrix")
        if config.effective_n() > matrix.size:
            raise InvalidConfigurationError(
                f"{config.effective_n()} prototypes for only {matrix.size} items")
        runs = [_run_median_seed(config, matrix, labels, s) for s in config.seeds]
    else:
        data, test = _vector_inputs(config)
        if test is not None and test.m != data.m:
            raise InvalidConfigurationError("train and test points differ in dimension")
        runs = []
        for seed in config.seeds:
            logger.info("%s seed %d", config.algorithm, seed)
            runs.append(_run_vector_seed(config, data, test, seed))
    return {
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "config": _config_echo(config),
        "runs": runs,
        "aggregate": _aggregate(runs),
    }


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"
