"""Output difference measures.

Two families quantify how much two fiber results differ:

* distribution measures compare normalized histograms of one characteristic
  (Euclidean distance scaled to [0, 1], and the metric-form Jensen-Shannon
  divergence), plus the per-bin variation used by the influence view;
* the best-match measure samples a fixed deterministic point pattern inside
  one fiber and scores tube overlap against candidate fibers of the other
  result, pruned by bounding boxes.

The point-to-polyline distance kernel is written with plain element-wise
operations only, so batched evaluations are bit-identical to pairwise ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fibers import Fiber, FiberResult, bounding_box, derive_characteristics

DEFAULT_POINTS_PER_FIBER = 500
MIN_POINTS_PER_FIBER = 100

# Per-station sampling pattern inside the tube cross-section:
# (radial fraction, angle). Fractions stay < 1 so every sampled point lies
# strictly inside its own tube.
_RADIAL_PATTERN = (
    (0.0, 0.0),
    (0.7, 0.0),
    (0.7, 0.5 * math.pi),
    (0.7, math.pi),
    (0.7, 1.5 * math.pi),
)


class MeasureError(ValueError):
    pass


@dataclass(frozen=True)
class Histogram:
    """Normalized equal-width histogram of one characteristic."""

    characteristic: str
    lo: float
    hi: float
    frequencies: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=np.float64)
        if f.ndim != 1 or f.size < 2:
            raise MeasureError("need at least 2 bins")
        if not (self.lo < self.hi):
            raise MeasureError(f"need lo < hi, got [{self.lo}, {self.hi}]")
        if (f < 0).any():
            raise MeasureError("negative frequency")
        total = f.sum()
        if total != 0.0 and abs(total - 1.0) > 1e-9:
            raise MeasureError(f"frequencies must sum to 1, got {total}")
        f.flags.writeable = False
        object.__setattr__(self, "frequencies", f)

    @property
    def bin_count(self) -> int:
        return self.frequencies.size

    @property
    def is_empty(self) -> bool:
        # all-zero frequency vector from an empty source result
        return self.frequencies.sum() == 0.0

    @property
    def bin_centers(self) -> np.ndarray:
        edges = np.linspace(self.lo, self.hi, self.bin_count + 1)
        return 0.5 * (edges[:-1] + edges[1:])


def build_histogram(values, bin_count: int, value_range, characteristic: str = "") -> Histogram:
    """Histogram with equal-width bins over a fixed range.

    The range must be the global one for the characteristic so histograms
    stay comparable across results. A value equal to the upper edge counts
    into the last bin; an empty value list yields all-zero frequencies.
    """
    lo, hi = float(value_range[0]), float(value_range[1])
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        freqs = np.zeros(bin_count)
    else:
        idx = np.floor((values - lo) / (hi - lo) * bin_count).astype(np.int64)
        idx = np.clip(idx, 0, bin_count - 1)
        freqs = np.bincount(idx, minlength=bin_count).astype(np.float64) / values.size
    return Histogram(characteristic=characteristic, lo=lo, hi=hi, frequencies=freqs)


def _check_same_binning(h1: Histogram, h2: Histogram) -> None:
    if h1.bin_count != h2.bin_count or h1.lo != h2.lo or h1.hi != h2.hi:
        raise MeasureError("histograms have mismatched binning")


def hist_euclidean(h1: Histogram, h2: Histogram) -> float:
    """Euclidean distance of the frequency vectors, scaled by 1/sqrt(2) so two
    disjoint unit-mass histograms score exactly 1."""
    _check_same_binning(h1, h2)
    return float(np.linalg.norm(h1.frequencies - h2.frequencies) / math.sqrt(2.0))


def jensen_shannon(h1: Histogram, h2: Histogram) -> float:
    """Metric-form Jensen-Shannon divergence in [0, 1].

    sqrt(KL(P||M)/2 + KL(Q||M)/2) with M the mixture, logarithms base 2 and
    0*log(0) := 0. Two all-zero histograms compare as 0.
    """
    _check_same_binning(h1, h2)
    p = h1.frequencies
    q = h2.frequencies
    if p.sum() == 0.0 and q.sum() == 0.0:
        return 0.0
    m = 0.5 * (p + q)
    with np.errstate(divide="ignore", invalid="ignore"):
        kl_p = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1) / np.where(m > 0, m, 1)), 0.0)
        kl_q = np.where(q > 0, q * np.log2(np.where(q > 0, q, 1) / np.where(m > 0, m, 1)), 0.0)
    div = 0.5 * kl_p.sum() + 0.5 * kl_q.sum()
    return float(math.sqrt(min(max(div, 0.0), 1.0)))


def per_bin_variation(histograms) -> np.ndarray:
    """Per-bin mean absolute difference between the first histogram (the star
    center) and each of the remaining ones (its branch neighbors)."""
    histograms = list(histograms)
    if len(histograms) < 2:
        raise MeasureError("need the center plus at least one neighbor")
    center = histograms[0]
    for h in histograms[1:]:
        _check_same_binning(center, h)
    diffs = np.stack([np.abs(center.frequencies - h.frequencies) for h in histograms[1:]])
    return diffs.mean(axis=0)


# ---------------------------------------------------------------------------
# best-match fiber measures
# ---------------------------------------------------------------------------

def segment_arrays(fiber: Fiber):
    """(start, direction, squared length) arrays of the polyline segments."""
    v = fiber.vertices
    start = v[:-1]
    direction = v[1:] - v[:-1]
    len2 = np.sum(direction * direction, axis=1)
    return start, direction, len2


def point_segment_dist2(points, seg_start, seg_dir, seg_len2):
    """Squared distances from each point to each segment, shape (N, S).

    Element-wise formulation: every output element depends only on its own
    (point, segment) inputs, so results do not change with batching.
    """
    wx = points[:, 0, None] - seg_start[None, :, 0]
    wy = points[:, 1, None] - seg_start[None, :, 1]
    wz = points[:, 2, None] - seg_start[None, :, 2]
    dx = seg_dir[None, :, 0]
    dy = seg_dir[None, :, 1]
    dz = seg_dir[None, :, 2]
    t = (wx * dx + wy * dy + wz * dz) / seg_len2[None, :]
    t = np.clip(t, 0.0, 1.0)
    ex = wx - t * dx
    ey = wy - t * dy
    ez = wz - t * dz
    return ex * ex + ey * ey + ez * ez


def point_in_tube(points, fiber: Fiber) -> np.ndarray:
    """Containment mask: distance from point to the polyline <= radius."""
    start, direction, len2 = segment_arrays(fiber)
    d2 = point_segment_dist2(np.asarray(points, dtype=np.float64), start, direction, len2)
    return d2.min(axis=1) <= fiber.radius * fiber.radius


def sample_fiber_points(fiber: Fiber, n_points: int) -> np.ndarray:
    """Deterministic point pattern inside a fiber tube.

    Stations are stratified along the polyline arclength; each station
    carries a fixed radial pattern (axis point plus an interior ring) in a
    frame derived from the local segment direction. Exactly n_points are
    returned, station-major.
    """
    if n_points < MIN_POINTS_PER_FIBER:
        raise MeasureError(f"need n_points >= {MIN_POINTS_PER_FIBER}, got {n_points}")
    v = fiber.vertices
    seg_vec = np.diff(v, axis=0)
    seg_len = np.linalg.norm(seg_vec, axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    total = cum[-1]

    per_station = len(_RADIAL_PATTERN)
    n_stations = -(-n_points // per_station)
    arcs = (np.arange(n_stations) + 0.5) / n_stations * total
    seg_idx = np.clip(np.searchsorted(cum, arcs, side="right") - 1, 0, len(seg_len) - 1)
    local_t = (arcs - cum[seg_idx]) / seg_len[seg_idx]
    centers = v[seg_idx] + local_t[:, None] * seg_vec[seg_idx]

    tangents = seg_vec[seg_idx] / seg_len[seg_idx][:, None]
    ref = np.where(
        (np.abs(tangents[:, 2]) < 0.9)[:, None],
        np.array([0.0, 0.0, 1.0]),
        np.array([1.0, 0.0, 0.0]),
    )
    u = np.cross(tangents, ref)
    u /= np.linalg.norm(u, axis=1)[:, None]
    w = np.cross(tangents, u)

    points = np.empty((n_stations * per_station, 3))
    for j, (frac, angle) in enumerate(_RADIAL_PATTERN):
        offset = fiber.radius * frac * (math.cos(angle) * u + math.sin(angle) * w)
        points[j::per_station] = centers + offset
    return points[:n_points]


def fiber_dissimilarity(f_x: Fiber, f_y: Fiber, n_points: int = DEFAULT_POINTS_PER_FIBER) -> float:
    """Overlap-based dissimilarity in [0, 1].

    One minus the fraction of f_x's sampled points contained in f_y's tube,
    corrected by the tube volume ratio min/max; 0 for identical fibers, 1
    for disjoint ones.
    """
    points = sample_fiber_points(f_x, n_points)
    contained = point_in_tube(points, f_y)
    overlap = contained.sum() / n_points
    v_x = derive_characteristics(f_x)["Volume"]
    v_y = derive_characteristics(f_y)["Volume"]
    ratio = min(v_x, v_y) / max(v_x, v_y)
    return float(min(max(1.0 - overlap * ratio, 0.0), 1.0))


@dataclass
class BoundingBoxIndex:
    """Axis-aligned boxes of one result's fibers, for candidate pruning."""

    boxes: np.ndarray = field(repr=False)  # (m, 2, 3)

    @classmethod
    def build(cls, result: FiberResult) -> "BoundingBoxIndex":
        if not result.fibers:
            return cls(boxes=np.zeros((0, 2, 3)))
        return cls(boxes=np.stack([bounding_box(f) for f in result.fibers]))

    def overlapping(self, box: np.ndarray) -> np.ndarray:
        """Indices of stored boxes overlapping the query box (closed boxes)."""
        if not len(self.boxes):
            return np.zeros(0, dtype=np.int64)
        hit = (self.boxes[:, 0] <= box[1]).all(axis=1) & (self.boxes[:, 1] >= box[0]).all(axis=1)
        return np.nonzero(hit)[0]


def best_match(
    fiber: Fiber,
    target: FiberResult,
    bbox_index: BoundingBoxIndex | None = None,
    n_points: int = DEFAULT_POINTS_PER_FIBER,
) -> tuple[int | None, float]:
    """Best-matching fiber of `target` and its dissimilarity.

    Only candidates with overlapping bounding boxes are evaluated (fibers
    with disjoint boxes have disjoint tubes and score exactly 1). Ties go to
    the lowest fiber id; when nothing scores below 1 the match is None.
    """
    if bbox_index is None:
        bbox_index = BoundingBoxIndex.build(target)
    candidates = bbox_index.overlapping(bounding_box(fiber))
    best_s = 1.0
    best_id = None
    for idx in candidates:
        other = target.fibers[idx]
        s = fiber_dissimilarity(fiber, other, n_points)
        if s < best_s or (s == best_s and best_id is not None and other.fiber_id < best_id):
            best_s = s
            best_id = other.fiber_id
    if best_s == 1.0:
        return None, 1.0
    return best_id, best_s


def result_dissimilarity(
    a: FiberResult,
    b: FiberResult,
    n_points: int = DEFAULT_POINTS_PER_FIBER,
) -> float:
    """Mean best-match dissimilarity of a's fibers against b.

    Directed: generally result_dissimilarity(a, b) != result_dissimilarity(b, a);
    downstream consumers symmetrize. An empty a scores 1 against a non-empty
    b and 0 against an empty one.
    """
    if not a.fibers:
        return 0.0 if not b.fibers else 1.0
    index = BoundingBoxIndex.build(b)
    return float(np.mean([best_match(f, b, index, n_points)[1] for f in a.fibers]))


@dataclass(frozen=True)
class DissimilarityTables:
    """All derived difference data of one collection, grouped.

    ``distribution_diff`` maps a divergence name to a (characteristic,
    result, result) tensor; ``per_bin_variation`` is indexed (star,
    parameter, characteristic, bin) with NaN where a star has no branch;
    ``best_match`` holds directed best-match result dissimilarities for the
    star-adjacent sample pairs; ``result_dissimilarity`` is the full
    directed matrix in ``sample_ids`` order (None until computed).
    """

    sample_ids: tuple[int, ...]
    distribution_diff: dict
    per_bin_variation: np.ndarray
    best_match: dict
    result_dissimilarity: np.ndarray | None
