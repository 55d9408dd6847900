"""Read-only HTTP query service over a preprocessed study.

Every endpoint returns versioned JSON derived from immutable preprocessed
state; nothing mutates the collection. Unknown ids give 404, malformed
queries 400 with a message.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, HTTPException

from .fibers import CHARACTERISTICS
from .measures import BoundingBoxIndex, best_match, point_in_tube, sample_fiber_points
from .preprocess import PreprocessedStudy
from .sensitivity import BEST_MATCH_MEASURE, distribution_measure_id
from .spatial import voxelize

_AXES = {"x": 0, "y": 1, "z": 2}


def _schema(name: str) -> str:
    return f"paramsens/{name}@1"


def _clean(value):
    """JSON-safe floats: NaN becomes None."""
    if isinstance(value, float):
        return None if math.isnan(value) else value
    if isinstance(value, np.ndarray):
        return [_clean(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def _parse_ids(text: str | None) -> list[int]:
    if not text:
        return []
    try:
        return [int(t) for t in text.split(",") if t != ""]
    except ValueError:
        raise HTTPException(400, f"malformed id list: {text!r}")


def create_app(study: PreprocessedStudy) -> FastAPI:
    app = FastAPI(title="paramsens query service")
    cfg = study.cfg
    plan = study.plan
    row = study.row
    by_id = {s.sample_id: s for s in plan.samples}
    status = {e["sample_id"]: e for e in study.manifest["samples"]}

    def require_result(sample_id: int) -> int:
        if sample_id not in row:
            raise HTTPException(404, f"unknown result id {sample_id}")
        return row[sample_id]

    def require_selected(selected: str | None) -> list[int]:
        ids = _parse_ids(selected)
        for i in ids:
            require_result(i)
        return ids

    @app.get("/study")
    def get_study():
        return {
            "schema": _schema("study"),
            "parameters": [{"name": d.name, "lo": d.lo, "hi": d.hi} for d in plan.descriptors],
            "sampling": {
                "stars": plan.star_count,
                "step": plan.step_width,
                "seed": plan.seed,
            },
            "characteristics": list(CHARACTERISTICS),
            "divergence": cfg.divergence,
            "samples": [
                {
                    "sample_id": s.sample_id,
                    "star_id": s.star_id,
                    "branch_param": s.branch_param,
                    "step_offset": s.step_offset,
                    "values": list(s.values),
                    "status": status.get(s.sample_id, {}).get("status", "missing"),
                    "fiber_count": status.get(s.sample_id, {}).get("fiber_count"),
                }
                for s in plan.samples
            ],
        }

    @app.get("/matrix")
    def get_matrix():
        m = study.matrix
        if m is None:
            raise HTTPException(400, "sensitivity stage not preprocessed")
        return {
            "schema": _schema("matrix"),
            "parameters": list(m.parameters),
            "characteristics": list(m.characteristics),
            "values": _clean(m.values),
            "raw": _clean(m.raw),
            "divergence": cfg.divergence,
            "default_axes": list(m.parameters[:2]),
        }

    @app.get("/influence")
    def get_influence(param: str | None = None, char: str | None = None,
                      selected: str | None = None):
        if param is None or char is None:
            raise HTTPException(400, "query needs param= and char=")
        if param not in plan.param_names:
            raise HTTPException(404, f"unknown parameter {param!r}")
        if char not in CHARACTERISTICS:
            raise HTTPException(404, f"unknown characteristic {char!r}")
        ids = require_selected(selected)
        p_idx = plan.param_names.index(param)
        c_idx = CHARACTERISTICS.index(char)
        measure_id = distribution_measure_id(cfg.divergence, char)
        lo, hi = study.ranges[c_idx]
        curve = study.field.regional[(param, measure_id)]
        with np.errstate(invalid="ignore"):
            variation = np.nanmean(study.perbin[:, p_idx, c_idx, :], axis=0)
        markers = []
        for sid in ids:
            s = by_id[sid]
            siblings = [
                {"sample_id": m.sample_id, "value": m.values[p_idx], "step_offset": m.step_offset}
                for m in plan.branch(s.star_id, param)
                if m.sample_id != sid and m.sample_id in row
            ]
            markers.append({
                "sample_id": sid,
                "star_id": s.star_id,
                "value": s.values[p_idx],
                "siblings": siblings,
            })
        return {
            "schema": _schema("influence"),
            "parameter": param,
            "characteristic": char,
            "range": [float(lo), float(hi)],
            "bin_edges": _clean(np.linspace(lo, hi, cfg.histogram_bins + 1)),
            "average_histogram": _clean(study.freqs[:, c_idx, :].mean(axis=0)),
            "per_bin_variation": _clean(variation),
            "regional": {
                "bin_centers": _clean(curve.bin_centers),
                "means": _clean(curve.means),
                "counts": _clean(curve.counts),
            },
            "global": _clean(study.field.global_.get((param, measure_id), float("nan"))),
            "global_best_match": _clean(
                study.field.global_.get((param, BEST_MATCH_MEASURE), float("nan"))
            ),
            "local": {
                str(star): _clean(study.field.local[(star, param, measure_id)])
                for star in range(plan.star_count)
                if (star, param, measure_id) in study.field.local
            },
            "markers": markers,
        }

    @app.get("/mds")
    def get_mds():
        if study.embedding is None:
            raise HTTPException(400, "embedding stage not preprocessed")
        return {
            "schema": _schema("mds"),
            "sample_ids": [int(s) for s in study.sample_ids],
            "coordinates": _clean(study.embedding.coordinates),
            "stress": study.embedding.stress,
            "trivial": study.embedding.trivial,
        }

    @app.get("/stars")
    def get_stars(selected: str | None = None):
        ids = require_selected(selected)
        sym = study.symmetrized() if study.pairwise is not None else None
        selected_stars = sorted({by_id[i].star_id for i in ids})
        segments = []
        for star_id in selected_stars:
            for param in plan.param_names:
                members = [s for s in plan.branch(star_id, param) if s.sample_id in row]
                for a, b in zip(members[:-1], members[1:]):
                    segments.append({
                        "a": a.sample_id,
                        "b": b.sample_id,
                        "star_id": star_id,
                        "branch_param": param,
                    })
        dissimilarity = {}
        if sym is not None:
            if ids:
                ref = ids[-1]
                mode = {"mode": "selected", "reference_id": ref}
                ref_row = sym[row[ref]]
                dissimilarity = {
                    str(int(s)): float(ref_row[row[int(s)]]) for s in study.sample_ids
                }
            else:
                mode = {"mode": "center"}
                for star_id in range(plan.star_count):
                    members = [s for s in plan.star_members(star_id) if s.sample_id in row]
                    center = next((s for s in members if s.branch_param is None), None)
                    if center is None:
                        continue
                    for s in members:
                        dissimilarity[str(s.sample_id)] = float(
                            sym[row[s.sample_id], row[center.sample_id]]
                        )
        else:
            mode = {"mode": "none"}
        return {
            "schema": _schema("stars"),
            "selected": ids,
            "stars": selected_stars,
            "segments": segments,
            "reference": mode,
            "dissimilarity": dissimilarity,
        }

    def _parse_slice(slice_: str | None):
        if study.volume is None:
            raise HTTPException(400, "volume stage not preprocessed")
        if slice_ is None:
            raise HTTPException(400, "query needs slice=axis,index")
        parts = slice_.split(",")
        if len(parts) != 2 or parts[0] not in _AXES:
            raise HTTPException(400, f"malformed slice {slice_!r}; expected axis,index")
        try:
            index = int(parts[1])
        except ValueError:
            raise HTTPException(400, f"malformed slice index {parts[1]!r}")
        axis = _AXES[parts[0]]
        if not (0 <= index < study.volume.geometry.dims[axis]):
            raise HTTPException(404, f"slice index {index} out of range")
        return axis, parts[0], index

    def _slice_payload(grid, axis, axis_name, index, values):
        g = grid.geometry
        in_plane = [n for n in ("x", "y", "z") if n != axis_name]
        return {
            "axis": axis_name,
            "index": index,
            "dims": list(g.dims),
            "origin": list(g.origin),
            "spacing": list(g.spacing),
            "in_plane_axes": in_plane,
            "values": _clean(values),
        }

    @app.get("/spatial")
    def get_spatial(slice: str | None = None):  # noqa: A002 - query name fixed by API
        axis, axis_name, index = _parse_slice(slice)
        values = study.volume.slice(axis, index)
        return {
            "schema": _schema("spatial"),
            **_slice_payload(study.volume, axis, axis_name, index, values),
        }

    @app.get("/spatial/result/{sample_id}")
    def get_spatial_result(sample_id: int, slice: str | None = None):  # noqa: A002
        require_result(sample_id)
        axis, axis_name, index = _parse_slice(slice)
        counts = voxelize(study.load_result(sample_id), study.volume.geometry)
        mask = (counts.slice(axis, index) > 0).astype(int)
        return {
            "schema": _schema("spatial-result"),
            "sample_id": sample_id,
            **_slice_payload(study.volume, axis, axis_name, index, mask),
        }

    @app.get("/fibers/{sample_id}")
    def get_fibers(sample_id: int):
        require_result(sample_id)
        result = study.load_result(sample_id)
        return {
            "schema": _schema("fibers"),
            "sample_id": sample_id,
            "fibers": [
                {
                    "fiber_id": f.fiber_id,
                    "radius": f.radius,
                    "vertices": _clean(f.vertices),
                    "characteristics": {
                        c: _clean(float(result.characteristics[i, j]))
                        for j, c in enumerate(CHARACTERISTICS)
                    },
                }
                for i, f in enumerate(result.fibers)
            ],
        }

    @app.get("/diff")
    def get_diff(ref: int | None = None, other: int | None = None,
                 fibers: str | None = None):
        if ref is None or other is None:
            raise HTTPException(400, "query needs ref= and other=")
        require_result(ref)
        require_result(other)
        fiber_ids = _parse_ids(fibers)
        if not fiber_ids:
            raise HTTPException(400, "query needs fibers=<id,...>")
        ref_result = study.load_result(ref)
        other_result = study.load_result(other)
        ref_by_id = {f.fiber_id: f for f in ref_result.fibers}
        other_by_id = {f.fiber_id: f for f in other_result.fibers}
        index = BoundingBoxIndex.build(other_result)
        panels = []
        for fid in fiber_ids:
            if fid not in ref_by_id:
                raise HTTPException(404, f"result {ref} has no fiber {fid}")
            fiber = ref_by_id[fid]
            match_id, s = best_match(fiber, other_result, index, cfg.match_points)
            if match_id is None:
                panels.append({
                    "fiber_id": fid, "match_id": None, "dissimilarity": s,
                    "ref_only": [], "other_only": [],
                })
                continue
            match = other_by_id[match_id]
            ref_pts = sample_fiber_points(fiber, cfg.match_points)
            other_pts = sample_fiber_points(match, cfg.match_points)
            ref_only = ref_pts[~point_in_tube(ref_pts, match)]
            other_only = other_pts[~point_in_tube(other_pts, fiber)]
            panels.append({
                "fiber_id": fid,
                "match_id": match_id,
                "dissimilarity": s,
                "ref_only": _clean(ref_only),
                "other_only": _clean(other_only),
            })
        return {
            "schema": _schema("diff"),
            "ref": ref,
            "other": other,
            "panels": panels,
        }

    return app


def serve(study: PreprocessedStudy, host: str = "127.0.0.1", port: int = 8765) -> None:
    import uvicorn

    uvicorn.run(create_app(study), host=host, port=port, log_level="warning")
