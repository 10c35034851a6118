"""Prequential (test-then-train) evaluation over a chunked CSV stream with a
covariate-shift source/target split of every chunk."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .trainer import AtlTrainer, TrainerConfig

log = logging.getLogger(__name__)

METRIC_FIELDS = (
    "chunk_index",
    "target_acc",
    "source_acc",
    "hidden_nodes",
    "agmm_source_M",
    "agmm_target_M",
    "cumulative_seconds",
)


class DataError(ValueError):
    pass


@dataclass
class StreamChunk:
    features: np.ndarray
    labels: Optional[np.ndarray]
    domain: str
    chunk_index: int

    def __post_init__(self):
        if len(self.features) == 0:
            raise ValueError("empty chunk")


@dataclass
class DatasetConfig:
    path: str
    label_column: str = "label"
    chunk_size: int = 1000
    source_fraction: float = 0.5


@dataclass
class ChunkRecord:
    chunk_index: int
    target_acc: float
    source_acc: float
    hidden_nodes: int
    agmm_source_M: int
    agmm_target_M: int
    cumulative_seconds: float


@dataclass
class RunMetrics:
    records: list = field(default_factory=list)
    hidden_nodes: int = 0
    agmm_source_M: int = 0
    agmm_target_M: int = 0
    train_seconds: float = 0.0
    config: Optional[TrainerConfig] = None
    trainer: Optional[AtlTrainer] = field(default=None, repr=False, compare=False)

    @property
    def target_accuracies(self) -> np.ndarray:
        return np.array([r.target_acc for r in self.records])

    @property
    def source_accuracies(self) -> np.ndarray:
        return np.array([r.source_acc for r in self.records])

    @property
    def mean_target_accuracy(self) -> float:
        return float(self.target_accuracies.mean()) if self.records else math.nan

    @property
    def mean_source_accuracy(self) -> float:
        return float(self.source_accuracies.mean()) if self.records else math.nan

    def summary(self, timing: bool = True) -> dict:
        cfg = self.config or TrainerConfig()
        out = {
            "chunks": len(self.records),
            "mean_target_acc": _num(self.mean_target_accuracy),
            "mean_source_acc": _num(self.mean_source_accuracy),
            "hidden_nodes": self.hidden_nodes,
            "agmm_source_M": self.agmm_source_M,
            "agmm_target_M": self.agmm_target_M,
            "kl_disabled": cfg.disable_kl,
            "agmm_ns_disabled": cfg.disable_agmm_ns,
            "structural_disabled": cfg.disable_structural,
            "epochs_per_batch": cfg.epochs_per_batch,
            "seed": cfg.seed,
        }
        if timing:
            out["training_seconds"] = self.train_seconds
        return out


def _num(v):
    return None if v is None or (isinstance(v, float) and math.isnan(v)) else v


# -- ingestion ---------------------------------------------------------------


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_csv(path, label_column="label", chunk_size: int = 1000):
    """Read a numeric CSV into ordered ``(features, labels)`` chunks.

    A first row containing any non-numeric cell is taken as a header.  Without
    a header ``label_column`` must be a column index.  A trailing partial
    chunk is kept when it holds at least 10% of ``chunk_size`` and otherwise
    merged into the previous chunk.
    """
    if chunk_size < 1:
        raise DataError("chunk_size must be >= 1")
    path = Path(path)
    if not path.is_file():
        raise DataError(f"dataset not found: {path}")
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: no rows")
    header = None
    if not all(_is_number(c) for c in rows[0]):
        header, rows = [c.strip() for c in rows[0]], rows[1:]
    width = len(header) if header else len(rows[0]) if rows else 0
    if header and str(label_column) in header:
        lab = header.index(str(label_column))
    else:
        try:
            lab = int(label_column)
        except (TypeError, ValueError):
            raise DataError(f"{path}: label column {label_column!r} not in header") from None
        if lab < 0:
            lab += width
        if not 0 <= lab < width:
            raise DataError(f"{path}: label column index {label_column} out of range")

    data = np.empty((len(rows), width))
    first = 2 if header else 1
    for i, r in enumerate(rows):
        if len(r) != width:
            raise DataError(f"{path}:{i + first}: expected {width} columns, found {len(r)}")
        try:
            data[i] = [float(c) for c in r]
        except ValueError:
            raise DataError(f"{path}:{i + first}: non-numeric cell in {r!r}") from None
    if not np.all(np.isfinite(data)):
        bad = int(np.flatnonzero(~np.isfinite(data).all(axis=1))[0])
        raise DataError(f"{path}:{bad + first}: non-finite value")
    labels = data[:, lab]
    if np.any(labels != np.round(labels)):
        raise DataError(f"{path}: label column holds non-integral values")
    X = np.delete(data, lab, axis=1)
    y = labels.astype(np.int64)
    return chunk_arrays(X, y, chunk_size)


def chunk_arrays(X, y, chunk_size: int):
    n = len(X)
    bounds = list(range(0, n, chunk_size))
    if len(bounds) > 1 and n - bounds[-1] < 0.1 * chunk_size:
        bounds.pop()
    ends = bounds[1:] + [n]
    return [(X[a:b], y[a:b]) for a, b in zip(bounds, ends) if b > a]


def scale_features(chunks):
    """Min-max scale every chunk with the warm-up chunk's range, clamped to [0, 1].

    Constant warm-up features map to 0.5.
    """
    if not chunks:
        return []
    X0 = chunks[0][0]
    lo, hi = X0.min(axis=0), X0.max(axis=0)
    span = hi - lo
    const = span <= 0
    log.info("scaling: min=%s max=%s", lo.tolist(), hi.tolist())
    out = []
    for X, y in chunks:
        Z = np.clip((X - lo) / np.where(const, 1.0, span), 0.0, 1.0)
        Z[:, const] = 0.5
        out.append((Z, y))
    return out


def covariate_split(X, y, source_fraction: float, rng, chunk_index: int = 0):
    """Biased split of one chunk into a labelled source and an unlabelled target.

    Rows are drawn into the source without replacement with probability
    proportional to ``exp(-||x - mean||^2 / sigma)``, ``sigma`` being the
    mean per-feature standard deviation of the chunk.  Returns the two
    ``StreamChunk`` objects and the held-back target labels.
    """
    X = np.asarray(X, dtype=float)
    n = len(X)
    n_s = int(np.floor(source_fraction * n + 0.5))
    if not 0 < n_s < n:
        raise DataError(f"chunk of {n} rows cannot give {n_s} source rows")
    sigma = float(X.std(axis=0).mean())
    if sigma > 0:
        d2 = ((X - X.mean(axis=0)) ** 2).sum(axis=1)
        w = np.exp(-(d2 - d2.min()) / sigma)
        p = w / w.sum()
    else:
        p = None
    src = np.sort(rng.choice(n, size=n_s, replace=False, p=p))
    mask = np.zeros(n, dtype=bool)
    mask[src] = True
    y = np.asarray(y)
    source = StreamChunk(X[mask], y[mask], "source", chunk_index)
    target = StreamChunk(X[~mask], None, "target", chunk_index)
    return source, target, y[~mask]


# -- evaluation loop -----------------------------------------------------------


def prequential(chunks, n_classes: int, config: TrainerConfig, source_fraction: float = 0.5):
    """Run the test-then-train loop over already scaled ``(X, y)`` chunks."""
    metrics = RunMetrics(config=config)
    if not chunks:
        return metrics
    split_rng = np.random.default_rng([config.seed, 1])
    trainer = AtlTrainer(chunks[0][0].shape[1], n_classes, config)
    elapsed = 0.0
    for k, (X, y) in enumerate(chunks):
        src, tgt, y_t = covariate_split(X, y, source_fraction, split_rng, k)
        pred_t, _, cm = trainer.process_chunk(src.features, src.labels, tgt.features, warmup=k == 0)
        elapsed += cm.train_seconds
        if k == 0:
            continue
        metrics.records.append(
            ChunkRecord(
                k,
                float(np.mean(pred_t == y_t)),
                cm.source_accuracy,
                cm.hidden_nodes,
                cm.agmm_source_components,
                cm.agmm_target_components,
                elapsed,
            )
        )
        log.debug("chunk %d: %s", k, metrics.records[-1])
    st = trainer.state
    metrics.hidden_nodes = st.net.hidden_count
    metrics.agmm_source_M = st.agmm_source.n_components
    metrics.agmm_target_M = st.agmm_target.n_components
    metrics.train_seconds = elapsed
    metrics.trainer = trainer
    return metrics


def run_prequential(dataset: DatasetConfig, config: TrainerConfig) -> RunMetrics:
    raw = load_csv(dataset.path, dataset.label_column, dataset.chunk_size)
    classes = np.unique(np.concatenate([y for _, y in raw]))
    remap = {c: i for i, c in enumerate(classes.tolist())}
    raw = [(X, np.array([remap[v] for v in y.tolist()], dtype=np.int64)) for X, y in raw]
    return prequential(scale_features(raw), max(len(classes), 2), config, dataset.source_fraction)


def write_metrics(metrics: RunMetrics, path, timing: bool = True):
    """CSV of one row per tested chunk plus a final ``summary`` row.

    With ``timing=False`` the wall-clock column is left empty so that files
    from identically seeded runs are byte-identical.
    """
    path = Path(path)
    try:
        fh = path.open("w", newline="")
    except OSError as exc:
        raise DataError(f"cannot write metrics to {path}: {exc}") from exc
    with fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(METRIC_FIELDS)
        for r in metrics.records:
            w.writerow([
                r.chunk_index,
                repr(r.target_acc),
                repr(r.source_acc),
                r.hidden_nodes,
                r.agmm_source_M,
                r.agmm_target_M,
                repr(r.cumulative_seconds) if timing else "",
            ])
        mt, ms = metrics.mean_target_accuracy, metrics.mean_source_accuracy
        w.writerow([
            "summary",
            "" if math.isnan(mt) else repr(mt),
            "" if math.isnan(ms) else repr(ms),
            metrics.hidden_nodes,
            metrics.agmm_source_M,
            metrics.agmm_target_M,
            repr(metrics.train_seconds) if timing else "",
        ])
    return path


def summary_json(metrics: RunMetrics, timing: bool = True) -> str:
    return json.dumps(metrics.summary(timing), sort_keys=True)
