import shutil
import time

import numpy as np
import pytest

from paramsens.cache import DiskCache, file_digest, load_arrays, save_arrays
from paramsens.fibers import CHARACTERISTICS
from paramsens.measures import Histogram, hist_euclidean, jensen_shannon
from paramsens.preprocess import STAGES, preprocess
from paramsens.runner import run_study
from paramsens.sensitivity import BEST_MATCH_MEASURE, distribution_measure_id
from tests.conftest import small_study_config


def cache_digests(collection):
    cache_dir = collection / "cache"
    return {
        p.name: file_digest(p)
        for p in sorted(cache_dir.iterdir())
        if not p.name.endswith(".meta.json")
    }


class TestArrayStore:
    def test_roundtrip(self, tmp_path):
        arrays = {"a": np.arange(6).reshape(2, 3), "b": np.array(["x", "y"])}
        save_arrays(tmp_path / "x.npz", arrays)
        loaded = load_arrays(tmp_path / "x.npz")
        assert np.array_equal(loaded["a"], arrays["a"])
        assert list(loaded["b"]) == ["x", "y"]

    def test_byte_deterministic(self, tmp_path):
        arrays = {"a": np.linspace(0, 1, 7)}
        save_arrays(tmp_path / "x.npz", arrays)
        save_arrays(tmp_path / "y.npz", arrays)
        assert (tmp_path / "x.npz").read_bytes() == (tmp_path / "y.npz").read_bytes()

    def test_corrupt_entry_recomputed(self, tmp_path, caplog):
        cache = DiskCache(tmp_path)
        calls = []

        def compute():
            calls.append(1)
            return {"v": np.ones(3)}

        cache.get_or_compute("k", "abc", compute)
        cache.payload_path("k", "abc").write_bytes(b"garbage")
        with caplog.at_level("WARNING"):
            value = cache.get_or_compute("k", "abc", compute)
        assert np.array_equal(value["v"], np.ones(3))
        assert len(calls) == 2
        assert any("corrupt" in m for m in caplog.messages)


class TestPreprocess:
    def test_stages_populated(self, small_study):
        assert small_study.freqs is not None
        assert small_study.dist is not None
        assert small_study.field is not None
        assert small_study.matrix is not None
        assert small_study.pairwise is not None
        assert small_study.embedding is not None
        assert small_study.volume is not None

    def test_histogram_frequencies_normalized(self, small_study):
        sums = small_study.freqs.sum(axis=2)
        assert np.allclose(sums[small_study.fiber_counts > 0], 1.0)

    def test_tables_match_pairwise_ops(self, small_study):
        # the vectorized tables must equal the two-histogram operations
        rng = np.random.default_rng(0)
        r = len(small_study.sample_ids)
        for _ in range(20):
            i, j = rng.integers(0, r, 2)
            c = rng.integers(0, len(CHARACTERISTICS))
            lo, hi = small_study.ranges[c]
            h_i = Histogram("c", lo, hi, small_study.freqs[i, c])
            h_j = Histogram("c", lo, hi, small_study.freqs[j, c])
            assert small_study.dist["euclidean"][c, i, j] == pytest.approx(
                hist_euclidean(h_i, h_j), abs=1e-12
            )
            assert small_study.dist["jensen_shannon"][c, i, j] == pytest.approx(
                jensen_shannon(h_i, h_j), abs=1e-12
            )

    def test_field_consistency(self, small_study):
        # global = mean of defined locals, re-derivable from persisted locals
        field = small_study.field
        for (param, measure), g in field.global_.items():
            locals_ = [
                v for (s, p, m), v in field.local.items()
                if p == param and m == measure
            ]
            assert g == pytest.approx(np.mean(locals_))

    def test_best_match_measure_present(self, small_study):
        assert any(m == BEST_MATCH_MEASURE for m in small_study.field.measure_ids)
        mid = distribution_measure_id("jensen_shannon", "Diameter")
        assert (("param2", mid) in small_study.field.global_)

    def test_matrix_normalized(self, small_study):
        m = small_study.matrix
        col_max = m.values.max(axis=0)
        nonzero = m.raw.max(axis=0) > 0
        assert np.allclose(col_max[nonzero], 1.0)
        assert np.all(m.values >= 0) and np.all(m.values <= 1)

    def test_pairwise_diagonal_zero(self, small_study):
        assert np.all(np.diag(small_study.pairwise) == 0.0)

    def test_tables_view_invariants(self, small_study):
        tables = small_study.tables
        assert tables.sample_ids == tuple(int(s) for s in small_study.sample_ids)
        for tensor in tables.distribution_diff.values():
            assert np.isfinite(tensor).all()
            assert (tensor >= 0).all() and (tensor <= 1).all()
        for value in tables.best_match.values():
            assert 0.0 <= value <= 1.0
        d = tables.result_dissimilarity
        assert np.all(np.diag(d) == 0.0)
        assert np.isfinite(d).all()

    def test_warm_load_uses_cache(self, small_collection):
        t0 = time.time()
        study = preprocess(small_collection)
        warm = time.time() - t0
        assert study.matrix is not None
        assert warm < 2.0  # pure cache reads

    def test_deleting_one_artifact_recomputes_only_it(self, small_collection):
        before = cache_digests(small_collection)
        emb = next(n for n in before if n.startswith("embedding-"))
        (small_collection / "cache" / emb).unlink()
        mtimes = {
            n: (small_collection / "cache" / n).stat().st_mtime_ns
            for n in before if n != emb
        }
        preprocess(small_collection)
        after = cache_digests(small_collection)
        assert after == before  # recomputed artifact is byte-identical
        for n, t in mtimes.items():
            assert (small_collection / "cache" / n).stat().st_mtime_ns == t

    def test_cold_runs_identical_digests(self, tmp_path):
        cfg = small_study_config()
        a = run_study(cfg, tmp_path / "a")
        preprocess(a)
        b = run_study(cfg, tmp_path / "b")
        preprocess(b)
        da, db = cache_digests(a), cache_digests(b)
        assert da == db
        assert file_digest(a / "manifest.json") == file_digest(b / "manifest.json")

    def test_partial_stages(self, tmp_path):
        cfg = small_study_config()
        coll = run_study(cfg, tmp_path / "c")
        study = preprocess(coll, stages=("sensitivity",))
        assert study.matrix is not None
        assert study.pairwise is None
        assert study.volume is None
        names = [p.name for p in (coll / "cache").iterdir()]
        assert not any(n.startswith("pairwise-") for n in names)
