"""Sample-plan generation: Latin Hypercube star centers plus star branches.

Around each center, every parameter is varied one at a time on a fixed
step grid (step width ``w`` as a fraction of the parameter's range),
traversing the full range in both directions. The plan is a pure function
of (descriptors, N, w, seed); the generator algorithm and seed are
recorded in the plan file so plans stay portable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fibers import ModelError, ParameterDescriptor, check_unique_names, validate_vector

GENERATOR_NAME = "numpy-pcg64"

# Branch values may land on a range endpoint up to rounding; accept within
# this fraction of the range and clamp.
_EDGE_TOL = 1e-9


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class PlanSample:
    sample_id: int
    star_id: int
    branch_param: str | None  # None for star centers
    step_offset: int  # 0 for centers, signed step count otherwise
    values: tuple[float, ...]


@dataclass(frozen=True)
class SamplePlan:
    descriptors: tuple[ParameterDescriptor, ...]
    star_count: int
    step_width: float
    seed: int
    samples: tuple[PlanSample, ...]

    @property
    def param_names(self) -> list[str]:
        return [d.name for d in self.descriptors]

    def centers(self) -> list[PlanSample]:
        return [s for s in self.samples if s.branch_param is None]

    def star_members(self, star_id: int) -> list[PlanSample]:
        return [s for s in self.samples if s.star_id == star_id]

    def branch(self, star_id: int, param: str) -> list[PlanSample]:
        """Center plus branch samples for one parameter, ordered by step offset."""
        members = [
            s
            for s in self.samples
            if s.star_id == star_id and (s.branch_param is None or s.branch_param == param)
        ]
        return sorted(members, key=lambda s: s.step_offset)


def latin_hypercube(descriptors, n: int, seed: int) -> list[tuple[float, ...]]:
    """Latin Hypercube sample: one point per equal-width stratum per dimension.

    Per dimension, strata are permuted and a uniform jitter picks the
    position inside each stratum. Deterministic for a fixed seed.
    """
    descriptors = tuple(descriptors)
    check_unique_names(descriptors)
    if n < 1:
        raise PlanError(f"need n >= 1 stars, got {n}")
    rng = np.random.Generator(np.random.PCG64(seed))
    cols = []
    for d in descriptors:
        strata = rng.permutation(n)
        jitter = rng.random(n)
        cols.append(d.lo + (strata + jitter) / n * d.span)
    return [tuple(float(col[i]) for col in cols) for i in range(n)]


def star_branches(center, descriptors, w: float, max_steps: int | None = None):
    """One-at-a-time branch points around a center.

    For each parameter p the branch holds center_p + k*w*span_p for every
    nonzero integer k keeping the value inside [lo, hi] (and |k| <=
    max_steps when given); all other coordinates stay at the center.
    Returns (param_index, step_offset, vector) tuples, parameters in
    declaration order and offsets ascending.
    """
    descriptors = tuple(descriptors)
    center = validate_vector(center, descriptors)
    if not (0.0 < w <= 0.5):
        raise PlanError(f"step width must be in (0, 0.5], got {w}")
    out = []
    for p, d in enumerate(descriptors):
        step = w * d.span
        k_max = int(np.ceil(1.0 / w)) + 1
        tol = _EDGE_TOL * d.span
        for k in range(-k_max, k_max + 1):
            if k == 0 or (max_steps is not None and abs(k) > max_steps):
                continue
            value = center[p] + k * step
            if value < d.lo - tol or value > d.hi + tol:
                continue
            value = min(max(value, d.lo), d.hi)
            vec = list(center)
            vec[p] = value
            out.append((p, k, tuple(vec)))
    out.sort(key=lambda t: (t[0], t[1]))
    return out


def build_plan(descriptors, n: int, w: float, seed: int,
               max_steps: int | None = None) -> SamplePlan:
    """Full plan: N LHS centers, each with its star branches, dense sample ids."""
    descriptors = tuple(descriptors)
    centers = latin_hypercube(descriptors, n, seed)
    samples = []
    sid = 0
    for star_id, center in enumerate(centers):
        samples.append(PlanSample(sid, star_id, None, 0, center))
        sid += 1
        for p, k, vec in star_branches(center, descriptors, w, max_steps):
            samples.append(PlanSample(sid, star_id, descriptors[p].name, k, vec))
            sid += 1
    return SamplePlan(descriptors, n, w, seed, tuple(samples))


def write_plan_csv(path, plan: SamplePlan) -> None:
    with open(path, "w") as f:
        f.write(f"# generator={GENERATOR_NAME}\n")
        f.write(f"# seed={plan.seed}\n")
        f.write(f"# stars={plan.star_count}\n")
        f.write(f"# step={plan.step_width!r}\n")
        for d in plan.descriptors:
            f.write(f"# param={d.name},{d.lo!r},{d.hi!r}\n")
        f.write("sample_id,star_id,branch_param,step_offset," + ",".join(plan.param_names) + "\n")
        for s in plan.samples:
            branch = s.branch_param or ""
            vals = ",".join(repr(v) for v in s.values)
            f.write(f"{s.sample_id},{s.star_id},{branch},{s.step_offset},{vals}\n")


def read_plan_csv(path) -> SamplePlan:
    meta = {}
    descriptors = []
    rows = []
    header = None
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                if key == "param":
                    name, lo, hi = value.split(",")
                    descriptors.append(ParameterDescriptor(name, float(lo), float(hi)))
                else:
                    meta[key] = value
                continue
            if header is None:
                header = line.split(",")
                continue
            rows.append(line.split(","))
    if header is None:
        raise PlanError(f"{path}: missing header")
    names = [d.name for d in descriptors]
    if header != ["sample_id", "star_id", "branch_param", "step_offset"] + names:
        raise PlanError(f"{path}: header does not match declared parameters")
    samples = []
    for r in rows:
        samples.append(
            PlanSample(
                sample_id=int(r[0]),
                star_id=int(r[1]),
                branch_param=r[2] or None,
                step_offset=int(r[3]),
                values=tuple(float(v) for v in r[4:]),
            )
        )
    return SamplePlan(
        descriptors=tuple(descriptors),
        star_count=int(meta.get("stars", len({s.star_id for s in samples}))),
        step_width=float(meta.get("step", "nan")),
        seed=int(meta.get("seed", 0)),
        samples=tuple(samples),
    )
