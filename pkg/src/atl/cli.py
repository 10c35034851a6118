"""Command-line entry point.

Two forms::

    atl --dataset sea.csv --chunk-size 1000 --seed 7 --out metrics.csv
    atl generate sea --rows 100000 --out sea.csv
"""

from __future__ import annotations

import argparse
import logging
import sys

from .harness import DataError, DatasetConfig, run_prequential, summary_json, write_metrics
from .synthetic import GENERATORS, generate_synthetic
from .trainer import ConfigurationError, TrainerConfig

ABLATIONS = {
    "none": {},
    "A": {"disable_kl": True},
    "B": {"disable_agmm_ns": True},
    "C": {"disable_structural": True},
}


class _Parser(argparse.ArgumentParser):
    # raise instead of exiting so main() can return an exit code
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be an integer >= 1, got {text}")
    return v


def _fraction(text):
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"must lie strictly between 0 and 1, got {text}")
    return v


def run_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="atl",
        description="Prequential multistream run over a CSV stream.  "
        "Use 'atl generate --help' for the synthetic data generators.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("--dataset", required=True, help="headered numeric CSV, one sample per row")
    p.add_argument("--label-column", default="label", help="label column name or index")
    p.add_argument("--chunk-size", type=_positive_int, default=1000, help="rows per chunk")
    p.add_argument("--epochs", type=_positive_int, default=1, help="passes over each chunk")
    p.add_argument("--lr", type=float, default=0.01, help="SGD learning rate")
    p.add_argument("--momentum", type=float, default=0.95, help="SGD momentum in [0, 1)")
    p.add_argument("--noise-fraction", type=float, default=0.1,
                   help="share of inputs masked for the denoising reconstruction")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--ablation", choices=sorted(ABLATIONS), default="none",
                   help="A: no KL alignment, B: single Gaussian and one-unit growth, C: frozen width")
    p.add_argument("--source-fraction", type=_fraction, default=0.5,
                   help="share of each chunk drawn into the labelled source")
    p.add_argument("--out", default="metrics.csv", help="metrics CSV path")
    p.add_argument("--no-timing", action="store_true",
                   help="leave wall-clock fields empty so reruns are byte-identical")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging")
    return p


def generate_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="atl generate",
        description="Write a synthetic drifting stream as CSV.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("kind", choices=sorted(GENERATORS))
    p.add_argument("--rows", type=_positive_int, default=100_000, help="number of samples")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--label-column", default="label", help="header name of the label column")
    p.add_argument("--out", required=True, help="CSV path to write")
    return p


def _generate(argv) -> int:
    args = generate_parser().parse_args(argv)
    path = generate_synthetic(args.kind, args.rows, args.out, args.seed, args.label_column)
    print(path)
    return 0


def _run(argv) -> int:
    args = run_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    config = TrainerConfig(
        learning_rate=args.lr,
        momentum=args.momentum,
        epochs_per_batch=args.epochs,
        noise_fraction=args.noise_fraction,
        seed=args.seed,
        **ABLATIONS[args.ablation],
    )
    dataset = DatasetConfig(args.dataset, args.label_column, args.chunk_size, args.source_fraction)
    metrics = run_prequential(dataset, config)
    write_metrics(metrics, args.out, timing=not args.no_timing)
    print(summary_json(metrics, timing=not args.no_timing))
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        if argv and argv[0] == "generate":
            return _generate(argv[1:])
        return _run(argv)
    except SystemExit as exc:  # --help
        return exc.code or 0
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except (ConfigurationError, DataError, ValueError, OSError) as exc:
        print(f"atl: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
