#!/usr/bin/env python3
"""Record service payloads for the frontend contract tests.

Runs a compact synthetic study (same response models as the verification
study), preprocesses it, and saves the JSON payloads the explorer UI
consumes into frontend/test/fixtures/.

    python3 scripts/record_ui_fixture.py [fixture-dir]
"""

import json
import logging
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from paramsens.config import StudyConfig
from paramsens.fibers import ParameterDescriptor
from paramsens.preprocess import preprocess
from paramsens.runner import run_study
from paramsens.service import create_app
from paramsens.synthetic import SynthConfig

logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")

ROOT = Path(__file__).resolve().parent.parent
OUT = Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "frontend" / "test" / "fixtures"

cfg = StudyConfig(
    descriptors=(
        ParameterDescriptor("param1", 0.0, 1.0),
        ParameterDescriptor("param2", 0.0, 1.0),
    ),
    stars=4,
    step=0.125,
    seed=2039,
    synthetic=SynthConfig(extent=(300.0, 300.0, 300.0), fiber_count=40, seed=42),
    match_points=100,
    grid_dims=(32, 32, 32),
    workers=2,
)

with tempfile.TemporaryDirectory() as tmp:
    collection = run_study(cfg, Path(tmp) / "collection")
    study = preprocess(collection)
    client = TestClient(create_app(study))

    ids = [int(s) for s in study.sample_ids]
    center = next(
        s.sample_id for s in study.plan.samples if s.branch_param is None and s.sample_id in ids
    )
    branch = next(
        s.sample_id
        for s in study.plan.samples
        if s.branch_param is not None and s.sample_id in ids
    )
    other = ids[-1]

    fixtures = {
        "study": "/study",
        "matrix": "/matrix",
        "mds": "/mds",
        "stars_none": "/stars",
        "stars_selected": f"/stars?selected={center},{branch}",
        "influence_diameter": f"/influence?param=param2&char=Diameter&selected={center}",
        "influence_length": f"/influence?param=param1&char=StraightLength&selected={center}",
        "spatial_slice": "/spatial?slice=z,16",
        "spatial_result": f"/spatial/result/{center}?slice=z,16",
        "fibers": f"/fibers/{center}",
        "diff_self": f"/diff?ref={center}&other={center}&fibers=0,1",
        "diff_cross": f"/diff?ref={center}&other={other}&fibers=0,1",
    }

    OUT.mkdir(parents=True, exist_ok=True)
    for name, url in fixtures.items():
        response = client.get(url)
        response.raise_for_status()
        (OUT / f"{name}.json").write_text(json.dumps(response.json(), indent=1))
        print(f"recorded {name} <- {url}")

    (OUT / "meta.json").write_text(
        json.dumps({"center": center, "branch": branch, "other": other, "ids": ids}, indent=1)
    )
    print(f"fixtures in {OUT}")
