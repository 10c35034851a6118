import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from atl.harness import (
    METRIC_FIELDS,
    ChunkRecord,
    DataError,
    DatasetConfig,
    RunMetrics,
    chunk_arrays,
    covariate_split,
    load_csv,
    prequential,
    run_prequential,
    scale_features,
    summary_json,
    write_metrics,
)
from atl.synthetic import sea, write_csv
from atl.trainer import AtlTrainer, TrainerConfig


def write_rows(path, rows, header=("a", "b", "label")):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if header:
            w.writerow(header)
        w.writerows(rows)
    return path


class TestLoad:
    def test_even_chunks(self, tmp_path):
        rows = [[i, i * 0.5, i % 2] for i in range(1000)]
        chunks = load_csv(write_rows(tmp_path / "d.csv", rows), "label", 100)
        assert [len(X) for X, _ in chunks] == [100] * 10

    def test_trailing_partial_kept(self, tmp_path):
        rows = [[i, i, i % 2] for i in range(1050)]
        chunks = load_csv(write_rows(tmp_path / "d.csv", rows), "label", 100)
        assert [len(X) for X, _ in chunks] == [100] * 10 + [50]

    def test_small_tail_merged(self, tmp_path):
        rows = [[i, i, i % 2] for i in range(1005)]
        chunks = load_csv(write_rows(tmp_path / "d.csv", rows), "label", 100)
        assert [len(X) for X, _ in chunks] == [100] * 9 + [105]

    def test_order_preserved(self, tmp_path):
        rows = [[i, -i, i % 3] for i in range(250)]
        chunks = load_csv(write_rows(tmp_path / "d.csv", rows), "label", 60)
        X = np.concatenate([c[0] for c in chunks])
        np.testing.assert_array_equal(X[:, 0], np.arange(250))
        np.testing.assert_array_equal(np.concatenate([c[1] for c in chunks]), np.arange(250) % 3)

    def test_label_column_anywhere(self, tmp_path):
        path = write_rows(tmp_path / "d.csv", [[1, 0.5, 2.0], [0, 0.1, 3.0]], header=("y", "a", "b"))
        (X, y), = load_csv(path, "y", 10)
        np.testing.assert_array_equal(y, [1, 0])
        np.testing.assert_array_equal(X, [[0.5, 2.0], [0.1, 3.0]])

    def test_headerless_by_index(self, tmp_path):
        path = write_rows(tmp_path / "d.csv", [[0.5, 1], [0.7, 0]], header=None)
        (X, y), = load_csv(path, -1, 10)
        np.testing.assert_array_equal(y, [1, 0])

    def test_headerless_by_name_fails(self, tmp_path):
        path = write_rows(tmp_path / "d.csv", [[0.5, 1], [0.7, 0]], header=None)
        with pytest.raises(DataError):
            load_csv(path, "label", 10)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="not found"):
            load_csv(tmp_path / "nope.csv")

    def test_non_numeric_row(self, tmp_path):
        path = write_rows(tmp_path / "d.csv", [[1, 2, 0], [1, "x", 1]])
        with pytest.raises(DataError, match=":3:"):
            load_csv(path)

    def test_ragged_row(self, tmp_path):
        path = write_rows(tmp_path / "d.csv", [[1, 2, 0], [1, 1]])
        with pytest.raises(DataError, match="expected 3 columns"):
            load_csv(path)

    def test_fractional_label(self, tmp_path):
        path = write_rows(tmp_path / "d.csv", [[1, 2, 0.5]])
        with pytest.raises(DataError):
            load_csv(path)

    @given(st.integers(1, 3000), st.integers(1, 400))
    def test_chunks_partition_rows(self, n, size):
        X = np.arange(n, dtype=float)[:, None]
        chunks = chunk_arrays(X, np.zeros(n), size)
        joined = np.concatenate([c[0] for c in chunks])[:, 0]
        np.testing.assert_array_equal(joined, np.arange(n))
        assert all(len(c[0]) >= 0.1 * size for c in chunks[1:])


class TestScale:
    def test_examples(self):
        warm = np.array([[2.0, 7.0], [4.0, 7.0]])
        later = np.array([[3.0, 1.0], [5.0, 9.0], [1.0, 7.0]])
        (Z0, _), (Z1, _) = scale_features([(warm, None), (later, None)])
        np.testing.assert_array_equal(Z0, [[0.0, 0.5], [1.0, 0.5]])
        np.testing.assert_array_equal(Z1, [[0.5, 0.5], [1.0, 0.5], [0.0, 0.5]])

    @given(st.integers(0, 10_000))
    def test_range(self, seed):
        rng = np.random.default_rng(seed)
        chunks = [(rng.normal(0, 5, (20, 3)), None) for _ in range(3)]
        for Z, _ in scale_features(chunks):
            assert Z.min() >= 0 and Z.max() <= 1


class TestSplit:
    def test_sizes(self):
        rng = np.random.default_rng(0)
        X, y = rng.uniform(size=(100, 3)), rng.integers(0, 2, 100)
        s, t, yt = covariate_split(X, y, 0.5, rng)
        assert len(s.features) == len(t.features) == 50 and len(yt) == 50
        assert t.labels is None and s.domain == "source" and t.domain == "target"

    def test_identical_rows_uniform(self):
        X = np.ones((10, 2))
        picks = np.zeros(10)
        for seed in range(2000):
            s, _, _ = covariate_split(X, np.arange(10), 0.3, np.random.default_rng(seed))
            picks[s.labels] += 1
        np.testing.assert_allclose(picks / 2000, 0.3, atol=0.04)

    @given(st.integers(2, 60), st.floats(0.05, 0.95), st.integers(0, 999))
    def test_partition(self, n, frac, seed):
        n_s = int(np.floor(frac * n + 0.5))
        if not 0 < n_s < n:
            return
        rng = np.random.default_rng(seed)
        X = rng.uniform(size=(n, 2))
        s, t, yt = covariate_split(X, np.arange(n), frac, rng)
        ids = np.concatenate([s.labels, yt])
        assert sorted(ids.tolist()) == list(range(n))
        assert len(s.features) + len(t.features) == n

    def test_near_cluster_over_represented(self):
        hits = 0
        for seed in range(1000):
            rng = np.random.default_rng(seed)
            near = rng.normal(0.45, 0.03, (80, 2))
            far = rng.normal(0.95, 0.03, (20, 2))
            X = np.vstack([near, far])
            is_near = np.r_[np.ones(80, bool), np.zeros(20, bool)]
            s, _, _ = covariate_split(X, np.arange(100), 0.5, rng)
            hits += is_near[s.labels].mean() > 0.8
        assert hits / 1000 > 0.99


def tiny_stream(seed=0, chunks=4, size=60):
    X, y = sea(chunks * size, seed=seed)
    return scale_features(chunk_arrays(X, y, size))


class TestPrequential:
    def test_warmup_excluded(self):
        m = prequential(tiny_stream(), 2, TrainerConfig())
        assert [r.chunk_index for r in m.records] == [1, 2, 3]

    def test_tcr_is_mean_of_chunks(self):
        m = prequential(tiny_stream(), 2, TrainerConfig())
        assert m.mean_target_accuracy == pytest.approx(np.mean([r.target_acc for r in m.records]))

    def test_target_labels_never_trained(self, monkeypatch):
        seen = []
        real = AtlTrainer.process_chunk

        def spy(self, X_s, y_s, X_t, warmup=False):
            seen.append((len(X_s), len(y_s), np.asarray(X_t).ndim))
            return real(self, X_s, y_s, X_t, warmup)

        monkeypatch.setattr(AtlTrainer, "process_chunk", spy)
        prequential(tiny_stream(), 2, TrainerConfig())
        assert seen == [(30, 30, 2)] * 4

    def test_identical_runs(self):
        a = prequential(tiny_stream(), 2, TrainerConfig(seed=4))
        b = prequential(tiny_stream(), 2, TrainerConfig(seed=4))
        assert [r.target_acc for r in a.records] == [r.target_acc for r in b.records]
        assert a.hidden_nodes == b.hidden_nodes

    def test_run_from_csv_remaps_labels(self, tmp_path):
        X, y = sea(240, seed=1)
        path = write_csv(tmp_path / "s.csv", X, y * 5 + 3)
        m = run_prequential(DatasetConfig(str(path), "label", 60), TrainerConfig())
        assert len(m.records) == 3
        assert all(0 <= r.target_acc <= 1 for r in m.records)


class TestWriteMetrics:
    def _metrics(self):
        recs = [ChunkRecord(i, 0.5 + 0.1 * i, 0.6, 3, 2, 1, 0.25 * i) for i in range(1, 4)]
        return RunMetrics(recs, 3, 2, 1, 0.75, TrainerConfig())

    def test_rows(self, tmp_path):
        path = write_metrics(self._metrics(), tmp_path / "m.csv")
        rows = list(csv.reader(open(path)))
        assert tuple(rows[0]) == METRIC_FIELDS
        assert len(rows) == 5 and rows[-1][0] == "summary"
        assert {len(r) for r in rows} == {len(METRIC_FIELDS)}
        for r in rows[1:]:
            assert 0 <= float(r[1]) <= 1 and 0 <= float(r[2]) <= 1

    def test_empty_run(self, tmp_path):
        rows = list(csv.reader(open(write_metrics(RunMetrics(), tmp_path / "m.csv"))))
        assert len(rows) == 2 and rows[1][0] == "summary" and rows[1][1] == ""

    def test_timing_off_blank(self, tmp_path):
        rows = list(csv.reader(open(write_metrics(self._metrics(), tmp_path / "m.csv", timing=False))))
        assert all(r[-1] == "" for r in rows[1:])

    def test_unwritable(self, tmp_path):
        with pytest.raises(DataError):
            write_metrics(self._metrics(), tmp_path / "missing" / "m.csv")

    def test_summary_json(self):
        s = json.loads(summary_json(self._metrics()))
        assert s["chunks"] == 3 and s["kl_disabled"] is False
        assert "training_seconds" not in json.loads(summary_json(self._metrics(), timing=False))

    @settings(max_examples=5, deadline=None)
    @given(st.integers(0, 100))
    def test_seeded_files_identical(self, seed):
        import tempfile
        from pathlib import Path

        with tempfile.TemporaryDirectory() as d:
            out = []
            for name in "ab":
                m = prequential(tiny_stream(seed, chunks=3), 2, TrainerConfig(seed=seed))
                out.append(write_metrics(m, Path(d) / name, timing=False).read_bytes())
            assert out[0] == out[1]
