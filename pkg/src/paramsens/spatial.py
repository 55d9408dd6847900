"""Voxel grids: per-result fiber coverage counts and the occupation ratio.

A voxel is covered by a fiber when its center lies inside the tube. The
occupation ratio sums per-result coverage counts over all results and
divides by the result count; values above 1 occur when a coarse grid lets
several fibers of one result touch the same voxel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fibers import Fiber, FiberResult
from .measures import point_segment_dist2, segment_arrays

DEFAULT_DIMS = (64, 64, 64)


@dataclass(frozen=True)
class GridGeometry:
    dims: tuple[int, int, int]
    origin: tuple[float, float, float]
    spacing: tuple[float, float, float]

    def __post_init__(self):
        if any(n < 1 for n in self.dims):
            raise ValueError("dims must be >= 1")
        if any(s <= 0 for s in self.spacing):
            raise ValueError("spacing must be > 0")

    @classmethod
    def covering(cls, lo, hi, dims=DEFAULT_DIMS) -> "GridGeometry":
        lo = np.asarray(lo, dtype=np.float64)
        hi = np.asarray(hi, dtype=np.float64)
        span = np.where(hi - lo > 0, hi - lo, 1.0)
        return cls(
            dims=tuple(int(n) for n in dims),
            origin=tuple(float(v) for v in lo),
            spacing=tuple(float(s) for s in span / np.asarray(dims)),
        )

    def axis_centers(self, axis: int) -> np.ndarray:
        n = self.dims[axis]
        return self.origin[axis] + (np.arange(n) + 0.5) * self.spacing[axis]


@dataclass(frozen=True)
class VoxelGrid:
    geometry: GridGeometry
    values: np.ndarray  # (nx, ny, nz)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != self.geometry.dims:
            raise ValueError("value shape does not match dims")
        object.__setattr__(self, "values", v)

    def slice(self, axis: int, index: int) -> np.ndarray:
        return np.take(self.values, index, axis=axis)


def _fiber_cover_mask(fiber: Fiber, geom: GridGeometry) -> np.ndarray:
    """Boolean grid: voxel centers inside the fiber tube.

    Only voxels inside the inflated per-segment bounding boxes are tested.
    """
    mask = np.zeros(geom.dims, dtype=bool)
    cx, cy, cz = (geom.axis_centers(a) for a in range(3))
    start, direction, len2 = segment_arrays(fiber)
    r = fiber.radius
    r2 = r * r
    for s in range(len(len2)):
        lo = np.minimum(start[s], start[s] + direction[s]) - r
        hi = np.maximum(start[s], start[s] + direction[s]) + r
        ix = np.nonzero((cx >= lo[0]) & (cx <= hi[0]))[0]
        iy = np.nonzero((cy >= lo[1]) & (cy <= hi[1]))[0]
        iz = np.nonzero((cz >= lo[2]) & (cz <= hi[2]))[0]
        if not (len(ix) and len(iy) and len(iz)):
            continue
        pts = np.stack(
            np.meshgrid(cx[ix], cy[iy], cz[iz], indexing="ij"), axis=-1
        ).reshape(-1, 3)
        d2 = point_segment_dist2(pts, start[s:s + 1], direction[s:s + 1], len2[s:s + 1])
        inside = (d2[:, 0] <= r2).reshape(len(ix), len(iy), len(iz))
        mask[np.ix_(ix, iy, iz)] |= inside
    return mask


def voxelize(result: FiberResult, geom: GridGeometry) -> VoxelGrid:
    """Per voxel: how many fibers of the result cover its center."""
    counts = np.zeros(geom.dims, dtype=np.float64)
    for fiber in result.fibers:
        counts += _fiber_cover_mask(fiber, geom)
    return VoxelGrid(geometry=geom, values=counts)


def occupation_ratio(results, geom: GridGeometry) -> VoxelGrid:
    """Sum of per-result coverage counts divided by the result count."""
    results = list(results)
    if not results:
        raise ValueError("need at least one result")
    total = np.zeros(geom.dims, dtype=np.float64)
    for r in results:
        total += voxelize(r, geom).values
    return VoxelGrid(geometry=geom, values=total / len(results))


def write_volume(path_base, grid: VoxelGrid) -> None:
    """Raw 32-bit little-endian floats, x-fastest, plus a text side-car header."""
    values = np.ascontiguousarray(
        np.transpose(grid.values, (2, 1, 0)), dtype="<f4"
    )  # z-slowest so x varies fastest in file order
    with open(str(path_base) + ".raw", "wb") as f:
        f.write(values.tobytes())
    g = grid.geometry
    with open(str(path_base) + ".hdr", "w") as f:
        f.write(f"dims={g.dims[0]},{g.dims[1]},{g.dims[2]}\n")
        f.write(f"origin={g.origin[0]!r},{g.origin[1]!r},{g.origin[2]!r}\n")
        f.write(f"spacing={g.spacing[0]!r},{g.spacing[1]!r},{g.spacing[2]!r}\n")
        f.write("order=x-fastest\n")
        f.write("dtype=f32le\n")


def read_volume(path_base) -> VoxelGrid:
    meta = {}
    with open(str(path_base) + ".hdr") as f:
        for line in f:
            key, _, value = line.strip().partition("=")
            meta[key] = value
    dims = tuple(int(v) for v in meta["dims"].split(","))
    origin = tuple(float(v) for v in meta["origin"].split(","))
    spacing = tuple(float(v) for v in meta["spacing"].split(","))
    if meta.get("order") != "x-fastest" or meta.get("dtype") != "f32le":
        raise ValueError(f"{path_base}: unsupported volume layout")
    raw = np.fromfile(str(path_base) + ".raw", dtype="<f4")
    values = raw.reshape(dims[2], dims[1], dims[0]).transpose(2, 1, 0).astype(np.float64)
    return VoxelGrid(geometry=GridGeometry(dims, origin, spacing), values=values)
