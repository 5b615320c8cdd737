"""Command line interface: ``neuralgas run`` and ``neuralgas generate``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .data import (
    generate_blobs,
    generate_block_matrix,
    generate_checkerboard,
    save_labels,
    save_matrix,
    save_points,
)
from .exceptions import NeuralGasError
from .experiment import MEDIAN_ALGORITHMS, VECTOR_ALGORITHMS, ExperimentConfig, report_json, run_experiment


def _lambda_start(text: str):
    return text if text == "auto" else float(text)


def _split(text: str):
    try:
        return float(text)
    except ValueError:
        return text


def _centers(text: str):
    return [[float(v) for v in center.split(",")] for center in text.split(";")]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="neuralgas",
                                     description="Neural gas, SOM and k-means clustering "
                                                 "for vector and dissimilarity data.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="train and evaluate, write a JSON report")
    run.add_argument("--algorithm", required=True,
                     choices=VECTOR_ALGORITHMS + MEDIAN_ALGORITHMS)
    run.add_argument("--mode", choices=("vector", "median"))
    run.add_argument("--points", help="CSV of training points")
    run.add_argument("--test-points", help="CSV of test points")
    run.add_argument("--matrix", help="CSV dissimilarity matrix (median mode)")
    run.add_argument("--labels", help="one integer label per line")
    run.add_argument("--test-labels", help="labels for --test-points")
    run.add_argument("--label-column", action="store_true",
                     help="the last CSV column of point files holds integer labels")
    run.add_argument("--prototypes", type=int, default=10)
    run.add_argument("--epochs", type=int, default=100)
    run.add_argument("--lambda-start", type=_lambda_start, default="auto")
    run.add_argument("--lambda-final", type=float, default=0.01)
    run.add_argument("--epsilon-start", type=float, default=0.5)
    run.add_argument("--epsilon-final", type=float, default=0.005)
    run.add_argument("--seeds", type=int, nargs="+", default=[0])
    run.add_argument("--split", type=_split,
                     help="test fraction, or (median mode) a file of test indices")
    run.add_argument("--jitter-scale", type=float, default=1e-6)
    run.add_argument("--candidate-restriction", action="store_true")
    run.add_argument("--out", help="report path (default: stdout)")

    gen = sub.add_parser("generate", help="write a synthetic data set")
    kinds = gen.add_subparsers(dest="kind", required=True)

    board = kinds.add_parser("checkerboard")
    board.add_argument("--rows", type=int, default=10)
    board.add_argument("--cols", type=int, default=10)
    board.add_argument("--min-pts", type=int, default=15)
    board.add_argument("--max-pts", type=int, default=20)
    board.add_argument("--seed", type=int, default=0)
    board.add_argument("--out", required=True, help="points CSV, label in the last column")

    blobs = kinds.add_parser("blobs")
    blobs.add_argument("--centers", type=_centers, required=True,
                       help='e.g. "0,0;10,10"')
    blobs.add_argument("--points-per-blob", type=int, default=20)
    blobs.add_argument("--spread", type=float, default=1.0)
    blobs.add_argument("--seed", type=int, default=0)
    blobs.add_argument("--out", required=True, help="points CSV, label in the last column")

    blocks = kinds.add_parser("blocks")
    blocks.add_argument("--sizes", type=int, nargs="+", required=True)
    blocks.add_argument("--intra", type=float, nargs=2, default=[0.0, 1.0])
    blocks.add_argument("--inter", type=float, nargs=2, default=[5.0, 6.0])
    blocks.add_argument("--seed", type=int, default=0)
    blocks.add_argument("--out", required=True, help="matrix CSV")
    blocks.add_argument("--labels-out", help="block labels, one per line")
    return parser


def _run(args) -> None:
    config = ExperimentConfig(
        algorithm=args.algorithm, mode=args.mode, n=args.prototypes, epochs=args.epochs,
        lambda_start=args.lambda_start, lambda_final=args.lambda_final,
        epsilon_start=args.epsilon_start, epsilon_final=args.epsilon_final,
        seeds=args.seeds, points=args.points, test_points=args.test_points,
        matrix=args.matrix, labels=args.labels, test_labels=args.test_labels,
        label_column=args.label_column, split=args.split, jitter_scale=args.jitter_scale,
        candidate_restriction=args.candidate_restriction, out=args.out)
    text = report_json(run_experiment(config))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _generate(args) -> None:
    rng = np.random.default_rng(args.seed)
    if args.kind == "checkerboard":
        save_points(args.out, generate_checkerboard(args.rows, args.cols, args.min_pts,
                                                    args.max_pts, rng))
    elif args.kind == "blobs":
        save_points(args.out, generate_blobs(args.centers, args.points_per_blob,
                                             args.spread, rng))
    else:
        matrix, labels = generate_block_matrix(args.sizes, args.intra, args.inter, rng)
        save_matrix(args.out, matrix)
        if args.labels_out:
            save_labels(args.labels_out, labels)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            _run(args)
        else:
            _generate(args)
    except (NeuralGasError, OSError) as exc:
        print(f"neuralgas: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
