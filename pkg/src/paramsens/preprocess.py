"""Derived-data preprocessing over a study collection, cached on disk.

Artifacts are computed in stages, each cached under a content key derived
from the manifest (which in turn digests every result file), the relevant
settings, and the pipeline version:

* histograms    - per-result characteristic histograms over global ranges
* tables        - pairwise distribution-difference matrices + per-bin variation
* star_match    - best-match dissimilarities for adjacent star-branch pairs
* sensitivity   - local / regional / global sensitivity field
* pairwise      - full directed best-match result-dissimilarity matrix
* embedding     - 2D MDS of the symmetrized matrix
* volume        - occupation-ratio voxel grid

A warm call loads everything back from the cache in a fraction of the cold
wall time; deleting one cache file recomputes only that artifact.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import matching
from .cache import PIPELINE_VERSION, DiskCache, digest
from .config import DIVERGENCES, StudyConfig, load_config
from .embedding import Embedding2D, mds
from .fibers import CHARACTERISTICS, FiberResult, read_fiber_csv
from .measures import DissimilarityTables
from .runner import CONFIG_FILE, load_manifest, load_plan
from .sampling import SamplePlan
from .sensitivity import (
    BEST_MATCH_MEASURE,
    InOutMatrix,
    RegionalCurve,
    SensitivityField,
    compute_field,
    distribution_measure_id,
    in_out_matrix,
)
from .spatial import GridGeometry, VoxelGrid, occupation_ratio

log = logging.getLogger(__name__)

STAGES = ("histograms", "tables", "star_match", "sensitivity", "pairwise", "embedding", "volume")

_DEPS = {
    "histograms": (),
    "tables": ("histograms",),
    "star_match": (),
    "sensitivity": ("tables", "star_match"),
    "pairwise": (),
    "embedding": ("pairwise",),
    "volume": (),
}


def _close(stages) -> list[str]:
    wanted = set()

    def add(s):
        if s not in wanted:
            for dep in _DEPS[s]:
                add(dep)
            wanted.add(s)

    for s in stages:
        add(s)
    return [s for s in STAGES if s in wanted]


@dataclass
class PreprocessedStudy:
    """All derived artifacts of one collection, ready to serve."""

    collection: Path
    cfg: StudyConfig
    plan: SamplePlan
    manifest: dict
    sample_ids: np.ndarray  # ok samples, ascending; row order of all matrices
    ranges: np.ndarray | None = None  # (C, 2)
    freqs: np.ndarray | None = None  # (R, C, B)
    fiber_counts: np.ndarray | None = None  # (R,)
    dist: dict | None = None  # divergence -> (C, R, R)
    perbin: np.ndarray | None = None  # (stars, P, C, B), nan where undefined
    star_pairs: dict | None = None  # (a, b) -> directed best-match value
    field: SensitivityField | None = None
    matrix: InOutMatrix | None = None
    pairwise: np.ndarray | None = None  # directed (R, R)
    embedding: Embedding2D | None = None
    volume: VoxelGrid | None = None
    _results: dict = dc_field(default_factory=dict, repr=False)
    _geometries: dict = dc_field(default_factory=dict, repr=False)

    @property
    def row(self) -> dict:
        return {int(s): i for i, s in enumerate(self.sample_ids)}

    def load_result(self, sample_id: int) -> FiberResult:
        if sample_id not in self._results:
            entry = next(
                (e for e in self.manifest["samples"]
                 if e["sample_id"] == sample_id and e["status"] == "ok"),
                None,
            )
            if entry is None:
                raise KeyError(f"no successful result for sample {sample_id}")
            self._results[sample_id] = read_fiber_csv(
                self.collection / entry["file"], result_id=sample_id
            )
        return self._results[sample_id]

    def geometry(self, sample_id: int) -> matching.ResultGeometry:
        if sample_id not in self._geometries:
            self._geometries[sample_id] = matching.build_geometry(
                self.load_result(sample_id), self.cfg.match_points
            )
        return self._geometries[sample_id]

    def symmetrized(self) -> np.ndarray:
        if self.pairwise is None:
            raise RuntimeError("pairwise stage not computed")
        return matching.symmetrized(self.pairwise)

    @property
    def tables(self) -> DissimilarityTables:
        """Grouped view over the per-stage dissimilarity artifacts."""
        return DissimilarityTables(
            sample_ids=tuple(int(s) for s in self.sample_ids),
            distribution_diff=self.dist or {},
            per_bin_variation=self.perbin,
            best_match=self.star_pairs or {},
            result_dissimilarity=self.pairwise,
        )


def characteristic_ranges(results) -> np.ndarray:
    """Global [lo, hi] per characteristic; degenerate ranges are widened."""
    lo = np.full(len(CHARACTERISTICS), np.inf)
    hi = np.full(len(CHARACTERISTICS), -np.inf)
    for r in results:
        if len(r.fibers):
            lo = np.minimum(lo, r.characteristics.min(axis=0))
            hi = np.maximum(hi, r.characteristics.max(axis=0))
    lo = np.where(np.isfinite(lo), lo, 0.0)
    hi = np.where(np.isfinite(hi), hi, 1.0)
    same = hi <= lo
    return np.stack([np.where(same, lo - 0.5, lo), np.where(same, lo + 0.5, hi)], axis=1)


def _histogram_freqs(results, ranges, bins) -> np.ndarray:
    freqs = np.zeros((len(results), len(CHARACTERISTICS), bins))
    for i, r in enumerate(results):
        if not len(r.fibers):
            continue
        for c in range(len(CHARACTERISTICS)):
            values = r.characteristics[:, c]
            lo, hi = ranges[c]
            idx = np.clip(
                np.floor((values - lo) / (hi - lo) * bins).astype(np.int64), 0, bins - 1
            )
            freqs[i, c] = np.bincount(idx, minlength=bins) / values.size
    return freqs


def _pairwise_euclidean(p: np.ndarray) -> np.ndarray:
    diff = p[:, None, :] - p[None, :, :]
    return np.sqrt((diff * diff).sum(-1)) / math.sqrt(2.0)


def _pairwise_jensen_shannon(p: np.ndarray) -> np.ndarray:
    a = p[:, None, :]
    b = p[None, :, :]
    m = 0.5 * (a + b)
    with np.errstate(divide="ignore", invalid="ignore"):
        kl_a = np.where(a > 0, a * np.log2(np.where(a > 0, a, 1) / np.where(m > 0, m, 1)), 0.0)
        kl_b = np.where(b > 0, b * np.log2(np.where(b > 0, b, 1) / np.where(m > 0, m, 1)), 0.0)
    div = 0.5 * kl_a.sum(-1) + 0.5 * kl_b.sum(-1)
    # two all-zero histograms compare as 0 (both-empty rule)
    empty = p.sum(-1) == 0
    div = np.where(empty[:, None] & empty[None, :], 0.0, div)
    return np.sqrt(np.clip(div, 0.0, 1.0))


def _adjacent_pairs(plan: SamplePlan, ok: set) -> list[tuple[int, int]]:
    """Ordered sample-id pairs of consecutive branch steps (both directions)."""
    pairs = []
    for star_id in range(plan.star_count):
        for param in plan.param_names:
            members = [s for s in plan.branch(star_id, param) if s.sample_id in ok]
            for a, b in zip(members[:-1], members[1:]):
                if b.step_offset - a.step_offset == 1:
                    pairs.append((a.sample_id, b.sample_id))
                    pairs.append((b.sample_id, a.sample_id))
    return sorted(set(pairs))


def preprocess(collection, stages=STAGES, cfg: StudyConfig | None = None) -> PreprocessedStudy:
    """Compute (or load from cache) the requested artifact stages."""
    collection = Path(collection)
    if cfg is None:
        cfg = load_config(collection / CONFIG_FILE)
    manifest = load_manifest(collection)
    plan = load_plan(collection)
    ok_entries = [e for e in manifest["samples"] if e["status"] == "ok"]
    if not ok_entries:
        raise RuntimeError("collection has no successful samples")
    sample_ids = np.array(sorted(e["sample_id"] for e in ok_entries), dtype=np.int64)
    ok = {int(s) for s in sample_ids}
    study = PreprocessedStudy(
        collection=collection, cfg=cfg, plan=plan, manifest=manifest, sample_ids=sample_ids
    )
    cache = DiskCache(cfg.resolve_cache_dir(collection))
    base = {
        "version": PIPELINE_VERSION,
        "config": manifest["config_digest"],
        "files": [e["digest"] for e in ok_entries],
    }

    def results_in_order():
        return [study.load_result(int(s)) for s in sample_ids]

    stages = _close(stages)

    if "histograms" in stages:
        key = digest({**base, "bins": cfg.histogram_bins, "kind": "histograms"})

        def compute_hist():
            results = results_in_order()
            ranges = characteristic_ranges(results)
            return {
                "ranges": ranges,
                "freqs": _histogram_freqs(results, ranges, cfg.histogram_bins),
                "fiber_counts": np.array([len(r.fibers) for r in results], dtype=np.int64),
            }

        arrays = cache.get_or_compute("histograms", key, compute_hist)
        study.ranges = arrays["ranges"]
        study.freqs = arrays["freqs"]
        study.fiber_counts = arrays["fiber_counts"]

    if "tables" in stages:
        key = digest({**base, "bins": cfg.histogram_bins, "kind": "tables"})

        def compute_tables():
            out = {}
            for div, fn in (
                ("euclidean", _pairwise_euclidean),
                ("jensen_shannon", _pairwise_jensen_shannon),
            ):
                out[f"dist_{div}"] = np.stack(
                    [fn(study.freqs[:, c, :]) for c in range(len(CHARACTERISTICS))]
                )
            row = study.row
            n_params = len(plan.param_names)
            perbin = np.full(
                (plan.star_count, n_params, len(CHARACTERISTICS), cfg.histogram_bins), np.nan
            )
            for star_id in range(plan.star_count):
                for p_idx, param in enumerate(plan.param_names):
                    members = [s for s in plan.branch(star_id, param) if s.sample_id in ok]
                    center = next((s for s in members if s.step_offset == 0), None)
                    neighbors = [s for s in members if s.step_offset != 0]
                    if center is None or not neighbors:
                        continue
                    c_f = study.freqs[row[center.sample_id]]
                    n_f = study.freqs[[row[s.sample_id] for s in neighbors]]
                    perbin[star_id, p_idx] = np.abs(n_f - c_f[None]).mean(axis=0)
            out["perbin"] = perbin
            return out

        arrays = cache.get_or_compute("tables", key, compute_tables)
        study.dist = {div: arrays[f"dist_{div}"] for div in DIVERGENCES}
        study.perbin = arrays["perbin"]

    if "star_match" in stages:
        key = digest({**base, "n_points": cfg.match_points, "kind": "star_match"})

        def compute_star_match():
            pairs = _adjacent_pairs(plan, ok)
            values = np.array(
                [
                    matching.directed_dissimilarity(study.geometry(a), study.geometry(b))
                    for a, b in pairs
                ]
            )
            return {"pairs": np.array(pairs, dtype=np.int64).reshape(len(pairs), 2),
                    "values": values}

        arrays = cache.get_or_compute("star_match", key, compute_star_match)
        study.star_pairs = {
            (int(a), int(b)): float(v)
            for (a, b), v in zip(arrays["pairs"], arrays["values"])
        }

    if "sensitivity" in stages:
        key = digest({
            **base,
            "kind": "sensitivity",
            "bins": cfg.histogram_bins,
            "regional_bins": cfg.regional_bins,
            "n_points": cfg.match_points,
        })
        measure_ids = [
            distribution_measure_id(div, c) for div in DIVERGENCES for c in CHARACTERISTICS
        ] + [BEST_MATCH_MEASURE]

        def compute_sensitivity():
            row = study.row
            measures = {}
            for div in DIVERGENCES:
                table = study.dist[div]
                for c_idx, c in enumerate(CHARACTERISTICS):
                    measures[distribution_measure_id(div, c)] = (
                        lambda a, b, t=table, ci=c_idx: float(t[ci, row[a], row[b]])
                    )
            measures[BEST_MATCH_MEASURE] = lambda a, b: 0.5 * (
                study.star_pairs[(a, b)] + study.star_pairs[(b, a)]
            )
            field = compute_field(plan, measures, bins=cfg.regional_bins, valid=ok)
            return _field_to_arrays(field, plan, measure_ids, cfg.regional_bins)

        arrays = cache.get_or_compute("sensitivity", key, compute_sensitivity)
        study.field = _field_from_arrays(arrays, plan, measure_ids)
        study.matrix = in_out_matrix(study.field, cfg.divergence)

    if "pairwise" in stages:
        key = digest({**base, "n_points": cfg.match_points, "kind": "pairwise"})

        def compute_pairwise():
            d = matching.pairwise_matrix(
                results_in_order(), n_points=cfg.match_points, workers=cfg.workers
            )
            return {"directed": d}

        study.pairwise = cache.get_or_compute("pairwise", key, compute_pairwise)["directed"]

    if "embedding" in stages:
        key = digest({**base, "n_points": cfg.match_points, "kind": "embedding"})

        def compute_embedding():
            emb = mds(study.symmetrized())
            return {
                "coordinates": emb.coordinates,
                "stress": np.array([emb.stress]),
                "trivial": np.array([emb.trivial]),
            }

        arrays = cache.get_or_compute("embedding", key, compute_embedding)
        study.embedding = Embedding2D(
            coordinates=arrays["coordinates"],
            stress=float(arrays["stress"][0]),
            trivial=bool(arrays["trivial"][0]),
        )

    if "volume" in stages:
        key = digest({**base, "dims": list(cfg.grid_dims), "kind": "volume"})

        def compute_volume():
            results = results_in_order()
            lo = np.full(3, np.inf)
            hi = np.full(3, -np.inf)
            for r in results:
                for f in r.fibers:
                    lo = np.minimum(lo, f.vertices.min(axis=0) - f.radius)
                    hi = np.maximum(hi, f.vertices.max(axis=0) + f.radius)
            lo = np.where(np.isfinite(lo), lo, 0.0)
            hi = np.where(np.isfinite(hi), hi, 1.0)
            geom = GridGeometry.covering(lo, hi, cfg.grid_dims)
            grid = occupation_ratio(results, geom)
            return {
                "values": grid.values,
                "origin": np.array(geom.origin),
                "spacing": np.array(geom.spacing),
            }

        arrays = cache.get_or_compute("volume", key, compute_volume)
        geom = GridGeometry(
            dims=cfg.grid_dims,
            origin=tuple(arrays["origin"]),
            spacing=tuple(arrays["spacing"]),
        )
        study.volume = VoxelGrid(geometry=geom, values=arrays["values"])

    return study


def _field_to_arrays(field: SensitivityField, plan, measure_ids, regional_bins) -> dict:
    n_s, params = plan.star_count, list(plan.param_names)
    locals_ = np.full((n_s, len(params), len(measure_ids)), np.nan)
    globals_ = np.full((len(params), len(measure_ids)), np.nan)
    means = np.full((len(params), len(measure_ids), regional_bins), np.nan)
    counts = np.zeros((len(params), len(measure_ids), regional_bins), dtype=np.int64)
    centers = np.zeros((len(params), regional_bins))
    for p_idx, p in enumerate(params):
        for m_idx, m in enumerate(measure_ids):
            for s in range(n_s):
                if (s, p, m) in field.local:
                    locals_[s, p_idx, m_idx] = field.local[(s, p, m)]
            if (p, m) in field.global_:
                globals_[p_idx, m_idx] = field.global_[(p, m)]
            curve = field.regional[(p, m)]
            means[p_idx, m_idx] = curve.means
            counts[p_idx, m_idx] = curve.counts
            centers[p_idx] = curve.bin_centers
    return {
        "locals": locals_, "globals": globals_, "regional_means": means,
        "regional_counts": counts, "bin_centers": centers,
        "measure_ids": np.array(measure_ids),
    }


def _field_from_arrays(arrays, plan, measure_ids) -> SensitivityField:
    params = list(plan.param_names)
    stored_ids = [str(m) for m in arrays["measure_ids"]]
    local = {}
    global_ = {}
    regional = {}
    for p_idx, p in enumerate(params):
        for m_idx, m in enumerate(stored_ids):
            for s in range(plan.star_count):
                v = arrays["locals"][s, p_idx, m_idx]
                if not np.isnan(v):
                    local[(s, p, m)] = float(v)
            g = arrays["globals"][p_idx, m_idx]
            if not np.isnan(g):
                global_[(p, m)] = float(g)
            regional[(p, m)] = RegionalCurve(
                parameter=p,
                measure_id=m,
                bin_centers=arrays["bin_centers"][p_idx],
                means=arrays["regional_means"][p_idx, m_idx],
                counts=arrays["regional_counts"][p_idx, m_idx],
            )
    return SensitivityField(
        parameters=tuple(params),
        measure_ids=tuple(stored_ids),
        local=local,
        regional=regional,
        global_=global_,
    )
