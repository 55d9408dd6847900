"""Static data-file summaries of a preprocessed study."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .preprocess import PreprocessedStudy
from .spatial import write_volume

SENSITIVITY_CSV = "sensitivity.csv"


def write_sensitivity_csv(path, study: PreprocessedStudy) -> None:
    """Long format: parameter, measure, entry, value.

    `entry` is a star id for local values, GLOBAL for globals, or the bin
    center for regional curve points (empty bins omitted).
    """
    field = study.field
    lines = ["parameter,measure,entry,value"]
    for param in field.parameters:
        for measure in field.measure_ids:
            for star in range(study.plan.star_count):
                key = (star, param, measure)
                if key in field.local:
                    lines.append(f"{param},{measure},{star},{field.local[key]!r}")
            if (param, measure) in field.global_:
                lines.append(f"{param},{measure},GLOBAL,{field.global_[(param, measure)]!r}")
            curve = field.regional[(param, measure)]
            for center, mean, count in zip(curve.bin_centers, curve.means, curve.counts):
                if count > 0:
                    lines.append(f"{param},{measure},{center!r},{mean!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_matrix_csv(path, study: PreprocessedStudy) -> None:
    m = study.matrix
    lines = ["parameter," + ",".join(m.characteristics)]
    for i, p in enumerate(m.parameters):
        lines.append(p + "," + ",".join(repr(v) for v in m.values[i]))
    lines.append("")
    lines.append("# raw global sensitivities")
    lines.append("parameter," + ",".join(m.characteristics))
    for i, p in enumerate(m.parameters):
        lines.append(p + "," + ",".join(repr(v) for v in m.raw[i]))
    Path(path).write_text("\n".join(lines) + "\n")


def write_embedding_csv(path, study: PreprocessedStudy) -> None:
    emb = study.embedding
    lines = [f"# stress={emb.stress!r}", "sample_id,u,v"]
    for sid, (u, v) in zip(study.sample_ids, emb.coordinates):
        lines.append(f"{int(sid)},{u!r},{v!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_report(study: PreprocessedStudy, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_matrix_csv(out / "matrix.csv", study)
    write_sensitivity_csv(out / SENSITIVITY_CSV, study)
    if study.embedding is not None:
        write_embedding_csv(out / "embedding.csv", study)
    if study.volume is not None:
        write_volume(out / "occupation", study.volume)

    ok = int(np.sum([e["status"] == "ok" for e in study.manifest["samples"]]))
    lines = [
        "paramsens study report",
        f"collection: {study.collection}",
        f"parameters: {', '.join(study.plan.param_names)}",
        f"stars: {study.plan.star_count}  step: {study.plan.step_width}  seed: {study.plan.seed}",
        f"samples: {len(study.manifest['samples'])} total, {ok} ok",
        f"divergence: {study.cfg.divergence}",
        "",
        "normalized in-out matrix (rows sorted by influence on average length):",
    ]
    m = study.matrix
    lines.append("  " + "  ".join(f"{c:>16}" for c in m.characteristics))
    for i, p in enumerate(m.parameters):
        lines.append(f"{p:>8}  " + "  ".join(f"{v:16.4f}" for v in m.values[i]))
    (out / "summary.txt").write_text("\n".join(lines) + "\n")
    return out
