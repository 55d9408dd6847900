import numpy as np
import pytest

from paramsens.config import StudyConfig
from paramsens.fibers import Fiber, ParameterDescriptor
from paramsens.synthetic import SynthConfig, TanhModel


def straight_fiber(fiber_id=0, start=(0.0, 0.0, 0.0), end=(0.0, 0.0, 10.0), radius=1.0):
    return Fiber(fiber_id, np.array([start, end], dtype=float), radius)


# Response models scaled down so small test volumes pack quickly.
SMALL_LENGTH_MODEL = TanhModel(a=50.0, b=10.0, c=5.0, d=-0.5)
SMALL_DIAMETER_MODEL = TanhModel(a=4.0, b=0.5, c=8.0, d=-0.3)


def small_synth_config(fiber_count=25, seed=5, extent=(120.0, 120.0, 120.0)):
    return SynthConfig(
        extent=extent,
        fiber_count=fiber_count,
        seed=seed,
        length_model=SMALL_LENGTH_MODEL,
        diameter_model=SMALL_DIAMETER_MODEL,
    )


def small_study_config(**overrides) -> StudyConfig:
    defaults = dict(
        descriptors=(
            ParameterDescriptor("param1", 0.0, 1.0),
            ParameterDescriptor("param2", 0.0, 1.0),
        ),
        stars=2,
        step=0.25,
        seed=11,
        synthetic=small_synth_config(),
        match_points=100,
        histogram_bins=20,
        grid_dims=(24, 24, 24),
        workers=1,
    )
    defaults.update(overrides)
    return StudyConfig(**defaults)


@pytest.fixture(scope="session")
def small_collection(tmp_path_factory):
    """A small synthetic study collection, run once per session."""
    from paramsens.runner import run_study

    out = tmp_path_factory.mktemp("collection")
    return run_study(small_study_config(), out)


@pytest.fixture(scope="session")
def small_study(small_collection):
    from paramsens.preprocess import preprocess

    return preprocess(small_collection)
