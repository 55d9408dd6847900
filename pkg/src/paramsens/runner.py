"""Study execution: run the target algorithm for every sample of the plan.

A study collection directory holds the rendered config, the sample plan, one
fiber file per successfully executed sample, and a manifest recording digests
and per-sample status. Reruns with an unchanged config are no-ops. Failed
samples are recorded and excluded downstream; the study aborts only when more
than half of all samples fail.
"""

from __future__ import annotations

import json
import logging
import subprocess
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from pathlib import Path

from . import cache as cache_mod
from .config import StudyConfig, config_fingerprint
from .fibers import read_fiber_csv, write_fiber_csv
from .sampling import SamplePlan, build_plan, read_plan_csv, write_plan_csv
from .synthetic import generate

log = logging.getLogger(__name__)

MANIFEST_SCHEMA = "paramsens/manifest@1"
PLAN_FILE = "plan.csv"
MANIFEST_FILE = "manifest.json"
CONFIG_FILE = "study.ini"
RESULTS_DIR = "results"


class StudyError(RuntimeError):
    pass


def result_filename(sample_id: int) -> str:
    return f"{RESULTS_DIR}/sample_{sample_id:05d}.csv"


def write_config_ini(cfg: StudyConfig, path) -> None:
    """Render the study config back to its section/key-value format."""
    lines = ["[parameters]"]
    for d in cfg.descriptors:
        lines.append(f"{d.name} = {d.lo!r}, {d.hi!r}")
    lines += [
        "",
        "[sampling]",
        f"stars = {cfg.stars}",
        f"step = {cfg.step!r}",
        f"seed = {cfg.seed}",
    ]
    if cfg.max_steps is not None:
        lines.append(f"max_steps = {cfg.max_steps}")
    lines += ["", "[target]"]
    if cfg.synthetic is not None:
        sc = cfg.synthetic
        lm, dm = sc.length_model, sc.diameter_model
        lines += [
            "kind = synthetic",
            f"extent = {sc.extent[0]!r}, {sc.extent[1]!r}, {sc.extent[2]!r}",
            f"fiber_count = {sc.fiber_count}",
            f"generator_seed = {sc.seed}",
            f"length_model = {lm.a!r}, {lm.b!r}, {lm.c!r}, {lm.d!r}",
            f"diameter_model = {dm.a!r}, {dm.b!r}, {dm.c!r}, {dm.d!r}",
            f"max_placement_attempts = {sc.attempts}",
        ]
    else:
        lines += [
            "kind = external",
            f"command = {cfg.external.command}",
            f"workdir = {cfg.external.workdir}",
            f"output = {cfg.external.output}",
        ]
    lines += [
        "",
        "[histogram]",
        f"bins = {cfg.histogram_bins}",
        f"divergence = {cfg.divergence}",
        f"regional_bins = {cfg.regional_bins}",
        "",
        "[grid]",
        f"dims = {cfg.grid_dims[0]}, {cfg.grid_dims[1]}, {cfg.grid_dims[2]}",
        "",
        "[dissimilarity]",
        f"points_per_fiber = {cfg.match_points}",
        "",
        "[run]",
        f"workers = {cfg.workers}",
    ]
    if cfg.cache_dir:
        lines.append(f"cache_dir = {cfg.cache_dir}")
    Path(path).write_text("\n".join(lines) + "\n")


def _normalized(values, descriptors):
    return tuple((v - d.lo) / d.span for v, d in zip(values, descriptors))


def _run_synthetic_sample(args):
    sample_id, norm_values, synth_cfg, path = args
    result = generate(norm_values[0], norm_values[1], synth_cfg, result_id=sample_id)
    write_fiber_csv(path, result)
    return sample_id, len(result.fibers)


def render_command(template: str, cfg: StudyConfig, values, sample_id: int, output: str) -> str:
    """Substitute parameter values (17 significant digits) and path fields."""
    fields = {d.name: f"{v:.17g}" for d, v in zip(cfg.descriptors, values)}
    fields["output"] = output
    fields["sample_id"] = str(sample_id)
    out = template
    for name, value in fields.items():
        out = out.replace("{" + name + "}", value)
    return out


def _run_external_sample(args):
    sample, cfg, collection = args
    out_path = collection / result_filename(sample.sample_id)
    rendered_output = render_command(
        cfg.external.output, cfg, sample.values, sample.sample_id, str(out_path)
    )
    command = render_command(
        cfg.external.command, cfg, sample.values, sample.sample_id, rendered_output
    )
    try:
        proc = subprocess.run(
            command, shell=True, cwd=cfg.external.workdir,
            capture_output=True, text=True, timeout=3600,
        )
    except (OSError, subprocess.TimeoutExpired) as exc:
        return sample.sample_id, None, f"launch failed: {exc}"
    if proc.returncode != 0:
        return sample.sample_id, proc.returncode, (proc.stderr or "")[-500:]
    produced = Path(rendered_output)
    if not produced.exists():
        return sample.sample_id, 0, f"command produced no output at {rendered_output}"
    if produced.resolve() != out_path.resolve():
        out_path.write_bytes(produced.read_bytes())
    try:
        result = read_fiber_csv(out_path, result_id=sample.sample_id)
    except Exception as exc:  # noqa: BLE001
        return sample.sample_id, 0, f"unreadable output: {exc}"
    return sample.sample_id, None, len(result.fibers)


def _manifest_up_to_date(collection: Path, config_digest: str) -> bool:
    manifest_path = collection / MANIFEST_FILE
    if not manifest_path.exists():
        return False
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError:
        return False
    if manifest.get("schema") != MANIFEST_SCHEMA or manifest.get("config_digest") != config_digest:
        return False
    for entry in manifest.get("samples", []):
        if entry["status"] != "ok":
            continue
        path = collection / entry["file"]
        if not path.exists() or cache_mod.file_digest(path) != entry["digest"]:
            return False
    return True


def run_study(cfg: StudyConfig, out_dir, force: bool = False) -> Path:
    """Execute the whole plan into a collection directory and return it."""
    collection = Path(out_dir)
    collection.mkdir(parents=True, exist_ok=True)
    (collection / RESULTS_DIR).mkdir(exist_ok=True)

    fingerprint = config_fingerprint(cfg)
    config_digest = cache_mod.digest(fingerprint)
    if not force and _manifest_up_to_date(collection, config_digest):
        log.info("collection up to date, skipping execution")
        return collection

    write_config_ini(cfg, collection / CONFIG_FILE)
    plan = build_plan(cfg.descriptors, cfg.stars, cfg.step, cfg.seed, cfg.max_steps)
    write_plan_csv(collection / PLAN_FILE, plan)

    entries = {}
    if cfg.synthetic is not None:
        tasks = [
            (
                s.sample_id,
                _normalized(s.values, cfg.descriptors),
                cfg.synthetic,
                str(collection / result_filename(s.sample_id)),
            )
            for s in plan.samples
        ]
        if cfg.workers > 1:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                outcomes = list(pool.map(_run_synthetic_sample, tasks, chunksize=4))
        else:
            outcomes = [_run_synthetic_sample(t) for t in tasks]
        for sample_id, fiber_count in outcomes:
            entries[sample_id] = {
                "status": "ok",
                "fiber_count": fiber_count,
                "requested": cfg.synthetic.fiber_count,
                "complete": fiber_count == cfg.synthetic.fiber_count,
            }
    else:
        tasks = [(s, cfg, collection) for s in plan.samples]
        with ThreadPoolExecutor(max_workers=max(1, cfg.workers)) as pool:
            outcomes = list(pool.map(_run_external_sample, tasks))
        for sample_id, exit_code, detail in outcomes:
            if isinstance(detail, int):
                entries[sample_id] = {"status": "ok", "fiber_count": detail}
            else:
                log.warning("sample %d failed: %s", sample_id, detail)
                entries[sample_id] = {
                    "status": "failed", "exit_code": exit_code, "error": detail,
                }

    failed = sum(1 for e in entries.values() if e["status"] != "ok")
    if failed * 2 > len(entries):
        raise StudyError(f"{failed} of {len(entries)} samples failed; aborting study")

    samples = []
    for s in plan.samples:
        entry = {"sample_id": s.sample_id, **entries[s.sample_id]}
        if entry["status"] == "ok":
            entry["file"] = result_filename(s.sample_id)
            entry["digest"] = cache_mod.file_digest(collection / entry["file"])
        samples.append(entry)

    manifest = {
        "schema": MANIFEST_SCHEMA,
        "config_digest": config_digest,
        "config": fingerprint,
        "plan_digest": cache_mod.file_digest(collection / PLAN_FILE),
        "samples": samples,
    }
    (collection / MANIFEST_FILE).write_text(cache_mod.canonical_json(manifest) + "\n")
    return collection


def load_manifest(collection) -> dict:
    path = Path(collection) / MANIFEST_FILE
    if not path.exists():
        raise StudyError(f"{collection}: no manifest; run the study first")
    return json.loads(path.read_text())


def load_plan(collection) -> SamplePlan:
    return read_plan_csv(Path(collection) / PLAN_FILE)
