"""Acceptance suite: every exit criterion at its stated tolerance.

The main synthetic verification study (2 parameters in [0,1], 10 stars,
step width 0.1, 80 fibers per result) is built once per session and shared
by the criteria that analyze it. Every test prints one pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s`.
"""

import math
import time

import numpy as np
import pytest
from scipy.stats import spearmanr

from paramsens import matching
from paramsens.config import StudyConfig
from paramsens.embedding import mds
from paramsens.fibers import CHARACTERISTICS, Fiber, ParameterDescriptor, build_result
from paramsens.measures import (
    BoundingBoxIndex,
    Histogram,
    best_match,
    fiber_dissimilarity,
    hist_euclidean,
    jensen_shannon,
)
from paramsens.preprocess import preprocess
from paramsens.runner import run_study
from paramsens.sampling import PlanSample, SamplePlan, star_branches
from paramsens.sensitivity import distribution_measure_id, local_sensitivity
from paramsens.spatial import GridGeometry, occupation_ratio, voxelize
from paramsens.synthetic import (
    GaussianOracle,
    SynthConfig,
    gaussian,
    gaussian_derivative,
    generate,
    interval_variance,
)
from tests.conftest import small_study_config, straight_fiber

# Frozen study of the pinned shape; the seed fixes one deterministic instance.
STUDY_SEED = 2039
GENERATOR_SEED = 42


def report(criterion: str, ok: bool, detail: str = ""):
    print(f"[{'PASS' if ok else 'FAIL'}] {criterion}" + (f"  ({detail})" if detail else ""))
    assert ok, f"{criterion}: {detail}"


@pytest.fixture(scope="session")
def synthetic_study(tmp_path_factory):
    """The criterion-1 study plus timing of the path that yields the matrix."""
    cfg = StudyConfig(
        descriptors=(
            ParameterDescriptor("param1", 0.0, 1.0),
            ParameterDescriptor("param2", 0.0, 1.0),
        ),
        stars=10,
        step=0.1,
        seed=STUDY_SEED,
        synthetic=SynthConfig(extent=(300.0, 300.0, 300.0), fiber_count=80, seed=GENERATOR_SEED),
        match_points=100,
        grid_dims=(64, 64, 64),
        workers=2,
    )
    out = tmp_path_factory.mktemp("acceptance")
    t0 = time.time()
    collection = run_study(cfg, out / "collection")
    study = preprocess(collection, stages=("sensitivity",))
    matrix_seconds = time.time() - t0
    study = preprocess(collection)  # remaining stages for criteria 7 and 8
    return study, matrix_seconds


class TestCriterion1MatrixDominance:
    def test_in_out_matrix_and_runtime(self, synthetic_study):
        study, matrix_seconds = synthetic_study
        m = study.matrix
        sl = m.characteristics.index("StraightLength")
        di = m.characteristics.index("Diameter")
        p1 = m.parameters.index("param1")
        p2 = m.parameters.index("param2")

        col_sl = m.values[:, sl]
        col_di = m.values[:, di]
        ok_max = col_sl[p1] == 1.0 and col_di[p2] == 1.0
        dominance_sl = m.raw[p1, sl] >= 5.0 * m.raw[p2, sl]
        dominance_di = m.raw[p2, di] >= 5.0 * m.raw[p1, di]
        ok_time = matrix_seconds <= 300.0
        report(
            "criterion 1: StraightLength column max at param1, Diameter at param2",
            bool(ok_max),
            f"norm SL={col_sl.round(3).tolist()} Di={col_di.round(3).tolist()}",
        )
        report(
            "criterion 1: >=5x raw dominance both ways",
            bool(dominance_sl and dominance_di),
            f"SL {m.raw[p1, sl]:.4f} vs {m.raw[p2, sl]:.4f}; "
            f"Di {m.raw[p2, di]:.4f} vs {m.raw[p1, di]:.4f}",
        )
        report("criterion 1: runtime <= 5 min", ok_time, f"{matrix_seconds:.1f}s")


class TestCriterion2RegionalPeaks:
    def test_diameter_peak_near_03(self, synthetic_study):
        study, _ = synthetic_study
        curve = study.field.regional[
            ("param2", distribution_measure_id(study.cfg.divergence, "Diameter"))
        ]
        peak = curve.peak_center()
        bin_width = 1.0 / len(curve.bin_centers)
        ok = (0.2 - bin_width) <= peak <= (0.4 + bin_width)
        report("criterion 2: param2 x Diameter peak in [0.2,0.4] +-1 bin", ok, f"peak={peak:.2f}")

    def test_length_peak_near_06(self, synthetic_study):
        study, _ = synthetic_study
        curve = study.field.regional[
            ("param1", distribution_measure_id(study.cfg.divergence, "StraightLength"))
        ]
        peak = curve.peak_center()
        bin_width = 1.0 / len(curve.bin_centers)
        ok = (0.4 - bin_width) <= peak <= (0.75 + bin_width)
        report(
            "criterion 2: param1 x StraightLength peak in [0.4,0.75] +-1 bin",
            ok, f"peak={peak:.2f}",
        )


class TestCriterion3GaussianOracle:
    def test_local_sensitivity_matches_derivative(self):
        oracle = GaussianOracle(0.0, 1.0)
        w = 0.01
        scale = max(abs(gaussian_derivative(x, oracle)) for x in (0.0, 0.5, 1.0, 2.0))
        worst = 0.0
        for x0 in (0.0, -0.5, 0.5, -1.0, 1.0, -2.0, 2.0):
            desc = (ParameterDescriptor("x", x0 - 0.5, x0 + 0.5),)
            samples = [PlanSample(0, 0, None, 0, (x0,))]
            for p, k, vec in star_branches((x0,), desc, w, max_steps=1):
                samples.append(PlanSample(len(samples), 0, "x", k, vec))
            plan = SamplePlan(desc, 1, w, 0, tuple(samples))
            xs = {s.sample_id: s.values[0] for s in plan.samples}

            def measure(a, b):
                return abs(gaussian(xs[a], oracle) - gaussian(xs[b], oracle)) / (w * 1.0)

            est = local_sensitivity(plan, 0, "x", measure)
            truth = abs(gaussian_derivative(x0, oracle))
            err = abs(est - truth)
            tol = 0.01 * truth if truth > 0 else 0.01 * scale
            worst = max(worst, err / max(tol, 1e-300) * 0.01)
            assert err <= tol, f"x={x0}: est {est:.5f} vs |f'| {truth:.5f}"
        report(
            "criterion 3: star-sampling local sensitivity matches |f'(x)| within 1%",
            True, f"worst relative error {worst:.4%}",
        )

    def test_interval_variance(self):
        value = interval_variance(GaussianOracle(0.0, 1.0), t=8.0, n_quad=512)
        ok = abs(value - 1.0) <= 1e-3
        report("criterion 3: interval_variance(t=8, sigma=1) = 1.0 +- 1e-3", ok, f"{value:.6f}")


class TestCriterion4MeasureProperties:
    def test_jensen_shannon_metric_on_1000_triples(self):
        rng = np.random.default_rng(404)
        worst_excess = 0.0
        for _ in range(1000):
            freqs = rng.random((3, 10))
            freqs /= freqs.sum(axis=1, keepdims=True)
            a, b, c = (Histogram("c", 0.0, 1.0, f) for f in freqs)
            dab = jensen_shannon(a, b)
            assert dab == jensen_shannon(b, a)
            assert 0.0 <= dab <= 1.0
            assert jensen_shannon(a, a) == 0.0
            excess = dab - (jensen_shannon(a, c) + jensen_shannon(c, b))
            worst_excess = max(worst_excess, excess)
        ok = worst_excess <= 1e-12
        report(
            "criterion 4: jensen_shannon symmetric, zero-iff-equal, <=1, triangle on 1000 triples",
            ok, f"worst triangle excess {worst_excess:.2e}",
        )

    def test_zero_iff_equal(self):
        rng = np.random.default_rng(405)
        for _ in range(200):
            f = rng.random((2, 8))
            f /= f.sum(axis=1, keepdims=True)
            a, b = (Histogram("c", 0.0, 1.0, x) for x in f)
            if not np.array_equal(a.frequencies, b.frequencies):
                assert jensen_shannon(a, b) > 0.0
        report("criterion 4: jensen_shannon zero iff equal", True)

    def test_hist_euclidean_range(self):
        rng = np.random.default_rng(406)
        values = []
        for _ in range(500):
            f = rng.random((2, 12))
            f /= f.sum(axis=1, keepdims=True)
            values.append(hist_euclidean(Histogram("c", 0, 1, f[0]), Histogram("c", 0, 1, f[1])))
        ok = all(0.0 <= v <= 1.0 for v in values)
        report("criterion 4: hist_euclidean in [0,1]", ok, f"max {max(values):.4f}")

    def test_fiber_self_and_disjoint(self):
        f = straight_fiber()
        self_zero = fiber_dissimilarity(f, f, 200) == 0.0
        g = straight_fiber(1, start=(100.0, 0, 0), end=(100.0, 0, 10))
        disjoint_one = fiber_dissimilarity(f, g, 200) == 1.0
        report("criterion 4: fiber_dissimilarity(f,f)=0", self_zero)
        report("criterion 4: disjoint-box pairs score exactly 1", disjoint_one)


class TestCriterion5OracleEquivalence:
    def test_pruned_equals_exhaustive_on_random_pairs(self):
        rng = np.random.default_rng(505)
        checked = 0
        for trial in range(10):
            cfg = SynthConfig(
                extent=(150.0, 150.0, 150.0), fiber_count=20,
                seed=int(rng.integers(0, 10_000)),
                length_model=small_study_config().synthetic.length_model,
                diameter_model=small_study_config().synthetic.diameter_model,
            )
            a = generate(float(rng.random()), float(rng.random()), cfg, 0)
            b = generate(float(rng.random()), float(rng.random()), cfg, 1)
            index = BoundingBoxIndex.build(b)
            for fiber in a.fibers:
                pruned = best_match(fiber, b, index, 100)
                scores = [(fiber_dissimilarity(fiber, g, 100), g.fiber_id) for g in b.fibers]
                s_min, id_min = min(scores)
                exhaustive = (None, 1.0) if s_min == 1.0 else (id_min, s_min)
                assert pruned == exhaustive
                checked += 1
        report(
            "criterion 5: pruned best_match == exhaustive on 10 random 20-fiber pairs",
            True, f"{checked} fibers compared, exact id and value equality",
        )

    def test_voxelize_equals_brute_force_8cubed(self):
        rng = np.random.default_rng(506)
        fibers = []
        for i in range(5):
            verts = rng.uniform(-3, 3, (3, 3)).cumsum(axis=0)
            fibers.append(Fiber(i, verts, float(rng.uniform(0.5, 1.5))))
        result = build_result(0, fibers)
        geom = GridGeometry((8, 8, 8), (-4.0, -4.0, -4.0), (1.2, 1.2, 1.2))
        grid = voxelize(result, geom)
        brute = np.zeros((8, 8, 8))
        centers = [geom.axis_centers(a) for a in range(3)]
        for i, cx in enumerate(centers[0]):
            for j, cy in enumerate(centers[1]):
                for k, cz in enumerate(centers[2]):
                    p = np.array([cx, cy, cz])
                    for f in result.fibers:
                        v = f.vertices
                        d2 = min(
                            float(np.sum((p - v[s] - np.clip(
                                np.dot(p - v[s], v[s + 1] - v[s])
                                / np.dot(v[s + 1] - v[s], v[s + 1] - v[s]), 0, 1,
                            ) * (v[s + 1] - v[s])) ** 2))
                            for s in range(len(v) - 1)
                        )
                        if d2 <= f.radius**2:
                            brute[i, j, k] += 1
        ok = np.array_equal(grid.values, brute)
        report("criterion 5: voxelize == brute-force center test on 8^3 grid", ok)


class TestCriterion6DeterminismAndCache:
    def test_cold_digests_identical_and_warm_fast(self, tmp_path):
        # reduced-size synthetic study: the determinism and cache properties
        # do not depend on study size (see decisions ledger)
        cfg = small_study_config(stars=3, seed=6)
        from tests.test_preprocess import cache_digests

        a = run_study(cfg, tmp_path / "a")
        t0 = time.time()
        preprocess(a)
        cold = time.time() - t0
        b = run_study(cfg, tmp_path / "b")
        preprocess(b)
        identical = cache_digests(a) == cache_digests(b)
        report(
            "criterion 6: two cold runs yield identical artifact digests",
            identical, f"{len(cache_digests(a))} artifacts",
        )
        t0 = time.time()
        preprocess(a)
        warm = time.time() - t0
        ok = warm <= 0.10 * cold
        report(
            "criterion 6: warm preprocess <= 10% of cold wall time",
            ok, f"cold {cold:.2f}s warm {warm:.3f}s ratio {warm / cold:.3f}",
        )


class TestCriterion7Mds:
    def test_exact_metrics_reproduced(self):
        d3 = np.array([[0.0, 1, 2], [1, 0, 1], [2, 1, 0]])
        emb3 = mds(d3)
        diff3 = np.abs(
            np.linalg.norm(
                emb3.coordinates[:, None, :] - emb3.coordinates[None, :, :], axis=-1
            ) - d3
        ).max()
        pts = np.array([[0.0, 0], [1, 0], [1, 1], [0, 1]])
        d4 = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
        emb4 = mds(d4)
        diff4 = np.abs(
            np.linalg.norm(
                emb4.coordinates[:, None, :] - emb4.coordinates[None, :, :], axis=-1
            ) - d4
        ).max()
        ok = diff3 <= 1e-6 and diff4 <= 1e-6
        report(
            "criterion 7: 2-embeddable metrics reproduced within 1e-6",
            ok, f"max errors {diff3:.2e}, {diff4:.2e}",
        )

    def test_synthetic_study_rank_preservation(self, synthetic_study):
        study, _ = synthetic_study
        sym = study.symmetrized()
        coords = study.embedding.coordinates
        d_emb = np.linalg.norm(coords[:, None, :] - coords[None, :, :], axis=-1)
        iu = np.triu_indices(len(sym), k=1)
        rho = float(spearmanr(sym[iu], d_emb[iu]).statistic)
        ok_rho = rho >= 0.8
        min_pair_match = int(np.argmin(sym[iu])) == int(np.argmin(d_emb[iu]))
        report("criterion 7: Spearman(dissimilarity, embedded) >= 0.8", ok_rho, f"rho={rho:.4f}")
        report(
            "criterion 7: minimum-dissimilarity pair is minimum-embedded pair",
            min_pair_match,
        )


class TestCriterion8OccupationRatio:
    def test_identical_results_exactly_one(self):
        a = build_result(0, [straight_fiber(0, radius=1.5)])
        b = build_result(1, [straight_fiber(0, radius=1.5)])
        geom = GridGeometry((8, 8, 8), (-4.0, -4.0, 0.0), (1.0, 1.0, 1.25))
        grid = occupation_ratio([a, b], geom)
        covered = grid.values[grid.values > 0]
        ok = covered.size > 0 and np.all(covered == 1.0)
        report("criterion 8: two identical results -> covered voxels exactly 1.0", bool(ok))

    def test_one_of_two_coverage_half(self):
        present = build_result(0, [straight_fiber(0, radius=1.5)])
        absent = build_result(
            1, [straight_fiber(0, start=(100.0, 100, 0), end=(100.0, 100, 10), radius=1.5)]
        )
        geom = GridGeometry((8, 8, 8), (-4.0, -4.0, 0.0), (1.0, 1.0, 1.25))
        grid = occupation_ratio([present, absent], geom)
        near = grid.values[:, :, :][grid.values > 0]
        ok = near.size > 0 and np.all(np.isin(near, [0.5]))
        report("criterion 8: one-of-two coverage -> 0.5", bool(ok))

    def test_coarse_grid_above_one(self):
        fibers = [
            Fiber(0, np.array([[-5.0, 0, 5], [5.0, 0, 5]]), 0.8),
            Fiber(1, np.array([[0.0, -5, 5], [0.0, 5, 5]]), 0.8),
        ]
        results = [
            build_result(0, fibers),
            build_result(1, [Fiber(f.fiber_id, f.vertices, f.radius) for f in fibers]),
        ]
        coarse = GridGeometry((3, 3, 1), (-7.5, -7.5, 0.0), (5.0, 5.0, 10.0))
        grid = occupation_ratio(results, coarse)
        ok = grid.values.max() > 1.0
        report("criterion 8: constructed coarse-grid case exceeds 1", bool(ok),
               f"max={grid.values.max():.1f}")
