"""Batched best-match computation over whole result collections.

Computing the pairwise result-dissimilarity matrix is the dominant
preprocessing cost. This module keeps per-result geometry (sampled points,
segment arrays, KD-trees over points and densified polylines) and prunes
(point, fiber) containment tests with a tree query whose radius guarantees
no contained point is ever skipped. The surviving candidates run through the
same element-wise distance kernel as the pairwise API, so the batched values
equal `measures.best_match` exactly.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .fibers import CHARACTERISTICS, FiberResult
from .measures import (
    DEFAULT_POINTS_PER_FIBER,
    point_segment_dist2,
    sample_fiber_points,
    segment_arrays,
)

_VOLUME_COL = CHARACTERISTICS.index("Volume")


@dataclass
class ResultGeometry:
    """Precomputed arrays of one result used by the batched matcher."""

    result_id: int
    n_points: int
    fiber_ids: np.ndarray  # (m,)
    points: np.ndarray  # (m * n_points, 3), fiber-major
    seg_start: np.ndarray
    seg_dir: np.ndarray
    seg_len2: np.ndarray
    seg_fiber: np.ndarray  # segment -> fiber index
    radii2: np.ndarray  # (m,)
    volumes: np.ndarray  # (m,)
    point_tree: cKDTree
    dens_tree: cKDTree | None
    dens_fiber: np.ndarray
    query_bound: float  # max radius + half the densification spacing

    @property
    def fiber_count(self) -> int:
        return len(self.fiber_ids)


def build_geometry(result: FiberResult, n_points: int = DEFAULT_POINTS_PER_FIBER) -> ResultGeometry:
    m = len(result.fibers)
    if m == 0:
        empty3 = np.zeros((0, 3))
        return ResultGeometry(
            result_id=result.result_id, n_points=n_points,
            fiber_ids=np.zeros(0, dtype=np.int64), points=empty3,
            seg_start=empty3, seg_dir=empty3, seg_len2=np.zeros(0),
            seg_fiber=np.zeros(0, dtype=np.int64), radii2=np.zeros(0),
            volumes=np.zeros(0), point_tree=cKDTree(np.zeros((1, 3))),
            dens_tree=None, dens_fiber=np.zeros(0, dtype=np.int64), query_bound=0.0,
        )

    points = np.concatenate([sample_fiber_points(f, n_points) for f in result.fibers])
    starts, dirs, len2s, seg_fiber = [], [], [], []
    for i, f in enumerate(result.fibers):
        s, d, l2 = segment_arrays(f)
        starts.append(s)
        dirs.append(d)
        len2s.append(l2)
        seg_fiber.append(np.full(len(l2), i, dtype=np.int64))
    radii = np.array([f.radius for f in result.fibers])

    # Densify polylines at a spacing of about the largest radius. Any point
    # within r of a polyline is then within r + h/2 of a densified node, which
    # bounds the tree query below.
    h = float(radii.max())
    dens_pts, dens_fib = [], []
    for i, f in enumerate(result.fibers):
        v = f.vertices
        for a, b in zip(v[:-1], v[1:]):
            seg_len = float(np.linalg.norm(b - a))
            n = max(2, int(np.ceil(seg_len / h)) + 1)
            ts = np.linspace(0.0, 1.0, n)
            dens_pts.append(a[None, :] + ts[:, None] * (b - a)[None, :])
            dens_fib.append(np.full(n, i, dtype=np.int64))
    dens_pts = np.concatenate(dens_pts)

    return ResultGeometry(
        result_id=result.result_id,
        n_points=n_points,
        fiber_ids=np.asarray(result.fiber_ids, dtype=np.int64),
        points=points,
        seg_start=np.concatenate(starts),
        seg_dir=np.concatenate(dirs),
        seg_len2=np.concatenate(len2s),
        seg_fiber=np.concatenate(seg_fiber),
        radii2=radii * radii,
        volumes=result.characteristics[:, _VOLUME_COL].copy(),
        point_tree=cKDTree(points),
        dens_tree=cKDTree(dens_pts),
        dens_fiber=np.concatenate(dens_fib),
        query_bound=h * 1.5 + 1e-9 * h,
    )


def overlap_counts(ga: ResultGeometry, gb: ResultGeometry) -> np.ndarray:
    """Per (fiber of a, fiber of b): number of a's sampled points inside b's tube.

    Candidate (point, fiber) pairs come from a KD-tree query that cannot miss
    a contained point; candidates are then tested with the exact kernel.
    """
    counts = np.zeros((ga.fiber_count, gb.fiber_count), dtype=np.int64)
    if ga.fiber_count == 0 or gb.fiber_count == 0:
        return counts
    pairs = ga.point_tree.sparse_distance_matrix(
        gb.dens_tree, gb.query_bound, output_type="ndarray"
    )
    if not len(pairs):
        return counts
    cand = np.unique(pairs["i"].astype(np.int64) * gb.fiber_count + gb.dens_fiber[pairs["j"]])
    pt_idx = cand // gb.fiber_count
    fib_idx = cand % gb.fiber_count

    order = np.argsort(fib_idx, kind="stable")
    pt_idx = pt_idx[order]
    fib_idx = fib_idx[order]
    bounds = np.searchsorted(fib_idx, np.arange(gb.fiber_count + 1))
    for j in range(gb.fiber_count):
        lo, hi = bounds[j], bounds[j + 1]
        if lo == hi:
            continue
        pts = ga.points[pt_idx[lo:hi]]
        mask = gb.seg_fiber == j
        d2 = point_segment_dist2(pts, gb.seg_start[mask], gb.seg_dir[mask], gb.seg_len2[mask])
        contained = d2.min(axis=1) <= gb.radii2[j]
        if contained.any():
            src_fiber = pt_idx[lo:hi][contained] // ga.n_points
            np.add.at(counts[:, j], src_fiber, 1)
    return counts


def best_match_table(ga: ResultGeometry, gb: ResultGeometry):
    """Best match id (-1 for none) and dissimilarity per fiber of a, against b.

    Equals `measures.best_match` fiber by fiber: identical kernel, identical
    tie rule (lowest (s, fiber id)).
    """
    if ga.fiber_count == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    if gb.fiber_count == 0:
        return np.full(ga.fiber_count, -1, dtype=np.int64), np.ones(ga.fiber_count)
    counts = overlap_counts(ga, gb)
    overlap = counts / ga.n_points
    vr = np.minimum.outer(ga.volumes, gb.volumes) / np.maximum.outer(ga.volumes, gb.volumes)
    s = np.clip(1.0 - overlap * vr, 0.0, 1.0)

    # lexicographic argmin over (s, fiber id)
    id_order = np.argsort(gb.fiber_ids, kind="stable")
    s_ordered = s[:, id_order]
    pick = np.argmin(s_ordered, axis=1)
    best_s = s_ordered[np.arange(ga.fiber_count), pick]
    best_id = gb.fiber_ids[id_order][pick]
    best_id = np.where(best_s == 1.0, -1, best_id)
    return best_id, best_s


def directed_dissimilarity(ga: ResultGeometry, gb: ResultGeometry) -> float:
    """Mean best-match dissimilarity of a's fibers against b."""
    if ga.fiber_count == 0:
        return 0.0 if gb.fiber_count == 0 else 1.0
    return float(best_match_table(ga, gb)[1].mean())


# ---------------------------------------------------------------------------
# full pairwise matrix, optionally in parallel
# ---------------------------------------------------------------------------

_WORKER: dict = {}


def _init_worker(results, n_points):
    _WORKER["results"] = results
    _WORKER["n_points"] = n_points
    _WORKER["geometries"] = {}


def _worker_geometry(idx: int) -> ResultGeometry:
    geoms = _WORKER["geometries"]
    if idx not in geoms:
        geoms[idx] = build_geometry(_WORKER["results"][idx], _WORKER["n_points"])
    return geoms[idx]


def _pair_task(pairs):
    out = []
    for i, j in pairs:
        gi = _worker_geometry(i)
        gj = _worker_geometry(j)
        out.append((i, j, directed_dissimilarity(gi, gj), directed_dissimilarity(gj, gi)))
    return out


def pairwise_matrix(
    results: list[FiberResult],
    n_points: int = DEFAULT_POINTS_PER_FIBER,
    workers: int = 1,
) -> np.ndarray:
    """Directed result-dissimilarity matrix D[i, j] over a whole collection.

    The diagonal is 0 (a result's fibers match themselves exactly). Output is
    independent of the worker count; work is split over unordered pairs and
    assembled by index.
    """
    n = len(results)
    d = np.zeros((n, n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if not pairs:
        return d

    if workers <= 1:
        _init_worker(results, n_points)
        chunks = [_pair_task(pairs)]
        _WORKER.clear()
    else:
        chunk_size = max(1, len(pairs) // (workers * 8))
        batches = [pairs[k:k + chunk_size] for k in range(0, len(pairs), chunk_size)]
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(results, n_points)
        ) as pool:
            chunks = list(pool.map(_pair_task, batches))
    for chunk in chunks:
        for i, j, dij, dji in chunk:
            d[i, j] = dij
            d[j, i] = dji
    return d


def symmetrized(d: np.ndarray) -> np.ndarray:
    return 0.5 * (d + d.T)
