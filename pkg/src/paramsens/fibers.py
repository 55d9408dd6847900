"""Domain model: parameters, fibers, results, and derived fiber characteristics.

A fiber is a constant-radius tube around a 3D polyline. Each fiber is
described by seven scalar characteristics derived purely from geometry;
characteristic values are always computed, never read from input files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

CHARACTERISTICS = (
    "StraightLength",
    "CurvedLength",
    "Diameter",
    "Volume",
    "SurfaceArea",
    "OrientationPhi",
    "OrientationTheta",
)

FIBER_CSV_HEADER = "fiber_id,vertex_index,x,y,z,radius"


class ModelError(ValueError):
    """Invalid domain object or malformed input file."""


@dataclass(frozen=True)
class ParameterDescriptor:
    """A named continuous input parameter with an inclusive range."""

    name: str
    lo: float
    hi: float

    def __post_init__(self):
        if not self.name:
            raise ModelError("parameter name must be non-empty")
        if not (self.lo < self.hi):
            raise ModelError(f"parameter {self.name!r}: need lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def span(self) -> float:
        return self.hi - self.lo


def check_unique_names(descriptors) -> None:
    names = [d.name for d in descriptors]
    if len(set(names)) != len(names):
        raise ModelError(f"duplicate parameter names in {names}")


def validate_vector(values, descriptors) -> tuple[float, ...]:
    """Validate one point in parameter space against its descriptors."""
    values = tuple(float(v) for v in values)
    if len(values) != len(descriptors):
        raise ModelError(f"expected {len(descriptors)} values, got {len(values)}")
    for v, d in zip(values, descriptors):
        if not (d.lo <= v <= d.hi) or not math.isfinite(v):
            raise ModelError(f"value {v} outside range [{d.lo}, {d.hi}] of {d.name!r}")
    return values


@dataclass(frozen=True)
class Fiber:
    """Constant-radius tube around an ordered 3D polyline.

    Vertices are world coordinates, shape (n, 3) with n >= 2; consecutive
    vertices must be distinct and the radius strictly positive.
    """

    fiber_id: int
    vertices: np.ndarray
    radius: float

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 3 or v.shape[0] < 2:
            raise ModelError(f"fiber {self.fiber_id}: vertices must be (n>=2, 3)")
        if not np.isfinite(v).all():
            raise ModelError(f"fiber {self.fiber_id}: non-finite vertex")
        if np.all(v == v[0]):
            raise ModelError(f"fiber {self.fiber_id}: degenerate (all vertices identical)")
        if (np.linalg.norm(np.diff(v, axis=0), axis=1) == 0.0).any():
            raise ModelError(f"fiber {self.fiber_id}: repeated consecutive vertex")
        if not (self.radius > 0.0 and math.isfinite(self.radius)):
            raise ModelError(f"fiber {self.fiber_id}: radius must be > 0")
        v.flags.writeable = False
        object.__setattr__(self, "vertices", v)


def _fold_axis(axis: np.ndarray) -> np.ndarray:
    # Unsigned axis: flip into the z >= 0 half space (ties broken on x, then y)
    # so orientation angles are direction-independent.
    x, y, z = axis
    if z < 0 or (z == 0 and (x < 0 or (x == 0 and y < 0))):
        return -axis
    return axis


def derive_characteristics(fiber: Fiber) -> dict[str, float]:
    """Compute all scalar characteristics of one fiber.

    StraightLength is the first-to-last vertex distance, CurvedLength the
    polyline arclength. Volume and SurfaceArea use the straight-tube
    formulas applied to the arclength (lateral surface, open ends).
    Orientation angles come from the unsigned end-to-end axis: Theta is
    the inclination against +z folded into [0, 90] degrees, Phi the
    azimuth atan2(y, x) of the folded axis in (-180, 180] degrees.
    """
    v = fiber.vertices
    straight = float(np.linalg.norm(v[-1] - v[0]))
    curved = float(np.linalg.norm(np.diff(v, axis=0), axis=1).sum())
    r = fiber.radius

    axis = v[-1] - v[0]
    norm = np.linalg.norm(axis)
    if norm == 0.0:
        phi = theta = 0.0  # closed polyline: axis undefined, fixed convention
    else:
        ax = _fold_axis(axis / norm)
        theta = math.degrees(math.acos(min(1.0, max(-1.0, ax[2]))))
        phi = math.degrees(math.atan2(ax[1], ax[0]))
    return {
        "StraightLength": straight,
        "CurvedLength": curved,
        "Diameter": 2.0 * r,
        "Volume": math.pi * r * r * curved,
        "SurfaceArea": 2.0 * math.pi * r * curved,
        "OrientationPhi": phi,
        "OrientationTheta": theta,
    }


def bounding_box(fiber: Fiber) -> np.ndarray:
    """Axis-aligned box [lo, hi] containing the whole tube: vertex extents
    inflated by the radius on all sides. Shape (2, 3)."""
    lo = fiber.vertices.min(axis=0) - fiber.radius
    hi = fiber.vertices.max(axis=0) + fiber.radius
    return np.array([lo, hi])


@dataclass(frozen=True)
class FiberResult:
    """The set of fibers produced by one run of the analyzed algorithm.

    `characteristics` is an (m, len(CHARACTERISTICS)) table aligned with
    `fibers`, derived at construction time.
    """

    result_id: int
    fibers: tuple[Fiber, ...]
    characteristics: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.characteristics, dtype=np.float64)
        if c.shape != (len(self.fibers), len(CHARACTERISTICS)):
            raise ModelError("characteristics table must have one row per fiber")
        if len(self.fibers) and not np.isfinite(c).all():
            raise ModelError("non-finite characteristic value")
        c.flags.writeable = False
        object.__setattr__(self, "characteristics", c)

    @property
    def fiber_ids(self) -> list[int]:
        return [f.fiber_id for f in self.fibers]

    def characteristic(self, name: str) -> np.ndarray:
        return self.characteristics[:, CHARACTERISTICS.index(name)]


def build_result(result_id: int, fibers) -> FiberResult:
    """Assemble a FiberResult, deriving the characteristics table."""
    fibers = tuple(fibers)
    table = np.array(
        [[derive_characteristics(f)[c] for c in CHARACTERISTICS] for f in fibers]
    ).reshape(len(fibers), len(CHARACTERISTICS))
    return FiberResult(result_id=result_id, fibers=fibers, characteristics=table)


def write_fiber_csv(path, result: FiberResult) -> None:
    """Write the long-format per-result fiber file.

    One row per vertex: `fiber_id,vertex_index,x,y,z,radius`, vertices of a
    fiber contiguous and ordered, radius repeated on every row.
    """
    with open(path, "w") as f:
        f.write(FIBER_CSV_HEADER + "\n")
        for fiber in result.fibers:
            r = float(fiber.radius)
            for i, (x, y, z) in enumerate(fiber.vertices):
                f.write(f"{fiber.fiber_id},{i},{float(x)!r},{float(y)!r},{float(z)!r},{r!r}\n")


def read_fiber_csv(path, result_id: int = 0) -> FiberResult:
    """Read a per-result fiber file, rejecting malformed geometry at load time."""
    with open(path) as f:
        header = f.readline().strip()
        if header != FIBER_CSV_HEADER:
            raise ModelError(f"{path}: expected header {FIBER_CSV_HEADER!r}, got {header!r}")
        rows = []
        for lineno, line in enumerate(f, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 6:
                raise ModelError(f"{path}:{lineno}: expected 6 fields")
            rows.append((int(parts[0]), int(parts[1]), *(float(p) for p in parts[2:])))

    fibers = []
    i = 0
    while i < len(rows):
        fid = rows[i][0]
        j = i
        while j < len(rows) and rows[j][0] == fid:
            j += 1
        chunk = rows[i:j]
        if [r[1] for r in chunk] != list(range(len(chunk))):
            raise ModelError(f"{path}: fiber {fid}: vertex_index not contiguous from 0")
        radii = {r[5] for r in chunk}
        if len(radii) != 1:
            raise ModelError(f"{path}: fiber {fid}: radius not constant")
        verts = np.array([[r[2], r[3], r[4]] for r in chunk])
        fibers.append(Fiber(fiber_id=fid, vertices=verts, radius=radii.pop()))
        i = j
    ids = [f.fiber_id for f in fibers]
    if len(set(ids)) != len(ids):
        raise ModelError(f"{path}: fiber ids not unique (non-contiguous blocks?)")
    return build_result(result_id, fibers)
