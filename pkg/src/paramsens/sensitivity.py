"""Local, regional, and global sensitivity aggregation over a sample plan.

The aggregation is measure-agnostic: a measure is any symmetric function of
two sample ids returning a nonnegative variation (distribution distance of
one characteristic, best-match dissimilarity, or a scalar testbed measure).

* local: per star and parameter, the mean variation between the star center
  and its immediate (offset +-1) branch neighbors;
* regional: step-normalized variation between adjacent branch samples,
  attributed to the midpoint parameter value and averaged in bins across the
  parameter range;
* global: mean of the defined local values over all stars.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fibers import CHARACTERISTICS
from .sampling import SamplePlan

MeasureFn = Callable[[int, int], float]

DEFAULT_REGIONAL_BINS = 10
# Matrix rows are ordered by influence on the average fiber length.
DEFAULT_SORT_CHARACTERISTIC = "StraightLength"


@dataclass(frozen=True)
class RegionalCurve:
    parameter: str
    measure_id: str
    bin_centers: np.ndarray
    means: np.ndarray  # nan where a bin holds no samples
    counts: np.ndarray

    def peak_center(self) -> float:
        """Parameter value where the curve attains its maximum.

        Saturating measures can tie several adjacent bins at the exact same
        maximum; the center of that contiguous run locates the peak better
        than its first bin, so ties resolve to the run's middle bin.
        """
        means = np.where(self.counts > 0, self.means, -np.inf)
        top = int(np.argmax(means))
        lo = top
        while lo > 0 and means[lo - 1] == means[top]:
            lo -= 1
        hi = top
        while hi + 1 < len(means) and means[hi + 1] == means[top]:
            hi += 1
        return float(self.bin_centers[(lo + hi) // 2])


@dataclass(frozen=True)
class SensitivityField:
    parameters: tuple[str, ...]
    measure_ids: tuple[str, ...]
    local: dict  # (star_id, parameter, measure_id) -> float
    regional: dict  # (parameter, measure_id) -> RegionalCurve
    global_: dict  # (parameter, measure_id) -> float


def _valid_branch(plan: SamplePlan, star_id: int, param: str, valid) -> list:
    members = plan.branch(star_id, param)
    if valid is None:
        return members
    return [s for s in members if s.sample_id in valid]


def local_sensitivity(
    plan: SamplePlan, star_id: int, param: str, measure: MeasureFn, valid=None
) -> float | None:
    """Mean variation between the star center and its offset +-1 neighbors.

    None when the center is missing or no immediate neighbor exists (fully
    clipped branch); such stars are excluded from the global mean.
    """
    members = _valid_branch(plan, star_id, param, valid)
    center = next((s for s in members if s.step_offset == 0), None)
    if center is None:
        return None
    values = [
        measure(center.sample_id, s.sample_id) for s in members if abs(s.step_offset) == 1
    ]
    if not values:
        return None
    return float(np.mean(values))


def regional_curve(
    plan: SamplePlan,
    param: str,
    measure: MeasureFn,
    bins: int = DEFAULT_REGIONAL_BINS,
    valid=None,
    measure_id: str = "",
) -> RegionalCurve:
    """Binned step-normalized variation along all star branches of a parameter.

    Every adjacent pair of branch samples (consecutive step offsets,
    center included) contributes variation / w at the pair's midpoint
    parameter value; pairs interrupted by an excluded sample are skipped.
    """
    d = next(d for d in plan.descriptors if d.name == param)
    p_idx = plan.param_names.index(param)
    positions, values = [], []
    for star_id in range(plan.star_count):
        members = _valid_branch(plan, star_id, param, valid)
        for a, b in zip(members[:-1], members[1:]):
            if b.step_offset - a.step_offset != 1:
                continue
            v = measure(a.sample_id, b.sample_id) / plan.step_width
            positions.append(0.5 * (a.values[p_idx] + b.values[p_idx]))
            values.append(v)

    edges = np.linspace(d.lo, d.hi, bins + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    means = np.full(bins, np.nan)
    counts = np.zeros(bins, dtype=np.int64)
    if positions:
        idx = np.clip(
            np.floor((np.asarray(positions) - d.lo) / d.span * bins).astype(np.int64),
            0, bins - 1,
        )
        vals = np.asarray(values)
        for b in range(bins):
            mask = idx == b
            counts[b] = mask.sum()
            if counts[b]:
                means[b] = vals[mask].mean()
    return RegionalCurve(param, measure_id, centers, means, counts)


def global_sensitivity(local_values) -> float | None:
    """Arithmetic mean of the defined local sensitivities over stars."""
    defined = [v for v in local_values if v is not None]
    if not defined:
        return None
    return float(np.mean(defined))


def compute_field(
    plan: SamplePlan,
    measures: dict[str, MeasureFn],
    bins: int = DEFAULT_REGIONAL_BINS,
    valid=None,
) -> SensitivityField:
    """Evaluate all locals, regional curves, and globals for every measure."""
    local = {}
    regional = {}
    global_ = {}
    for measure_id, fn in measures.items():
        for param in plan.param_names:
            locals_here = []
            for star_id in range(plan.star_count):
                v = local_sensitivity(plan, star_id, param, fn, valid)
                if v is not None:
                    local[(star_id, param, measure_id)] = v
                locals_here.append(v)
            g = global_sensitivity(locals_here)
            if g is not None:
                global_[(param, measure_id)] = g
            regional[(param, measure_id)] = regional_curve(
                plan, param, fn, bins, valid, measure_id
            )
    return SensitivityField(
        parameters=tuple(plan.param_names),
        measure_ids=tuple(measures),
        local=local,
        regional=regional,
        global_=global_,
    )


def distribution_measure_id(divergence: str, characteristic: str) -> str:
    return f"{divergence}:{characteristic}"

BEST_MATCH_MEASURE = "best_match"


@dataclass(frozen=True)
class InOutMatrix:
    """Column-normalized global sensitivities: parameters x characteristics."""

    parameters: tuple[str, ...]
    characteristics: tuple[str, ...]
    values: np.ndarray  # normalized, each column max -> 1 (all-zero stays 0)
    raw: np.ndarray

    def cell(self, param: str, characteristic: str) -> float:
        return float(
            self.values[self.parameters.index(param), self.characteristics.index(characteristic)]
        )


def parameter_order(
    field: SensitivityField,
    divergence: str,
    sort_characteristic: str = DEFAULT_SORT_CHARACTERISTIC,
) -> list[str]:
    """Parameters by descending influence on the sort characteristic."""
    mid = distribution_measure_id(divergence, sort_characteristic)
    return sorted(
        field.parameters,
        key=lambda p: -(field.global_.get((p, mid), 0.0)),
    )


def in_out_matrix(
    field: SensitivityField,
    divergence: str,
    characteristics=CHARACTERISTICS,
    sort_characteristic: str = DEFAULT_SORT_CHARACTERISTIC,
) -> InOutMatrix:
    params = parameter_order(field, divergence, sort_characteristic)
    raw = np.zeros((len(params), len(characteristics)))
    for i, p in enumerate(params):
        for j, c in enumerate(characteristics):
            raw[i, j] = field.global_.get((p, distribution_measure_id(divergence, c)), 0.0)
    col_max = raw.max(axis=0)
    values = np.divide(raw, np.where(col_max > 0, col_max, 1.0))
    return InOutMatrix(
        parameters=tuple(params),
        characteristics=tuple(characteristics),
        values=values,
        raw=raw,
    )
