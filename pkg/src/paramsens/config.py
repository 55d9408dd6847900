"""Study configuration: plain-text section/key-value files (INI syntax).

A study file declares the parameters, the sampling settings, the target
algorithm (the built-in synthetic generator or an external command line),
and the derived-data settings. See README for the full format.
"""

from __future__ import annotations

import configparser
import os
import re
from dataclasses import dataclass, field

from .fibers import ModelError, ParameterDescriptor, check_unique_names
from .synthetic import DEFAULT_DIAMETER_MODEL, DEFAULT_LENGTH_MODEL, SynthConfig, TanhModel

DEFAULT_HISTOGRAM_BINS = 20
DEFAULT_DIVERGENCE = "jensen_shannon"
DIVERGENCES = ("jensen_shannon", "euclidean")

CACHE_ENV_VAR = "PARAMSENS_CACHE"

_PLACEHOLDER = re.compile(r"\{([A-Za-z0-9_]+)\}")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExternalTarget:
    """External pipeline triggered per sample through the command line.

    The command template must reference every parameter placeholder exactly
    once; `{output}` names the fiber file the command must produce (also
    available pre-rendered through the `output` path template).
    """

    command: str
    workdir: str = "."
    output: str = "{output}"


@dataclass(frozen=True)
class StudyConfig:
    descriptors: tuple[ParameterDescriptor, ...]
    stars: int
    step: float
    seed: int
    synthetic: SynthConfig | None = None
    external: ExternalTarget | None = None
    max_steps: int | None = None
    histogram_bins: int = DEFAULT_HISTOGRAM_BINS
    divergence: str = DEFAULT_DIVERGENCE
    regional_bins: int = 10
    grid_dims: tuple[int, int, int] = (64, 64, 64)
    match_points: int = 500
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    cache_dir: str | None = None  # default: <collection>/cache

    def __post_init__(self):
        check_unique_names(self.descriptors)
        if self.stars < 1:
            raise ConfigError("sampling stars must be >= 1")
        if not (0 < self.step <= 0.5):
            raise ConfigError("sampling step must be in (0, 0.5]")
        if (self.synthetic is None) == (self.external is None):
            raise ConfigError("exactly one target (synthetic or external) required")
        if self.divergence not in DIVERGENCES:
            raise ConfigError(f"divergence must be one of {DIVERGENCES}")
        if self.synthetic is not None and len(self.descriptors) != 2:
            raise ConfigError("the synthetic target takes exactly 2 parameters")
        if self.external is not None:
            self._check_command(self.external.command)

    def _check_command(self, command: str) -> None:
        names = [d.name for d in self.descriptors]
        refs = _PLACEHOLDER.findall(command)
        for n in names:
            if refs.count(n) != 1:
                raise ConfigError(
                    f"command template must reference {{{n}}} exactly once: {command!r}"
                )
        extra = set(refs) - set(names) - {"output", "sample_id"}
        if extra:
            raise ConfigError(f"unknown placeholders in command template: {sorted(extra)}")

    @property
    def param_names(self) -> list[str]:
        return [d.name for d in self.descriptors]

    def resolve_cache_dir(self, collection_dir) -> str:
        env = os.environ.get(CACHE_ENV_VAR)
        if env:
            return env
        if self.cache_dir:
            return self.cache_dir
        return os.path.join(str(collection_dir), "cache")


def _floats(text: str, n: int | None = None) -> tuple[float, ...]:
    parts = tuple(float(p.strip()) for p in text.split(","))
    if n is not None and len(parts) != n:
        raise ConfigError(f"expected {n} comma-separated values, got {text!r}")
    return parts


def _ints(text: str, n: int) -> tuple[int, ...]:
    return tuple(int(round(v)) for v in _floats(text, n))


def _tanh_model(text: str) -> TanhModel:
    a, b, c, d = _floats(text, 4)
    return TanhModel(a, b, c, d)


def parse_parameters(cp: configparser.ConfigParser) -> tuple[ParameterDescriptor, ...]:
    if not cp.has_section("parameters"):
        raise ConfigError("missing [parameters] section")
    descriptors = []
    for name, bounds in cp.items("parameters"):
        lo, hi = _floats(bounds, 2)
        try:
            descriptors.append(ParameterDescriptor(name, lo, hi))
        except ModelError as exc:
            raise ConfigError(str(exc)) from exc
    if not descriptors:
        raise ConfigError("[parameters] section is empty")
    return tuple(descriptors)


def load_config(path) -> StudyConfig:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise ConfigError(f"cannot read config file {path}")
    descriptors = parse_parameters(cp)

    if not cp.has_section("sampling"):
        raise ConfigError("missing [sampling] section")
    s = cp["sampling"]
    stars = s.getint("stars")
    step = s.getfloat("step")
    seed = s.getint("seed", 0)
    max_steps = s.getint("max_steps") if "max_steps" in s else None

    if not cp.has_section("target"):
        raise ConfigError("missing [target] section")
    t = cp["target"]
    kind = t.get("kind", "synthetic").strip()
    synth = ext = None
    if kind == "synthetic":
        synth = SynthConfig(
            extent=_floats(t.get("extent", "300,300,300"), 3),
            fiber_count=t.getint("fiber_count", 80),
            seed=t.getint("generator_seed", 0),
            length_model=_tanh_model(t.get("length_model", "215,15,5,-0.5")),
            diameter_model=_tanh_model(t.get("diameter_model", "7,0.5,8,-0.3")),
            max_placement_attempts=t.getint("max_placement_attempts")
            if "max_placement_attempts" in t
            else None,
        )
    elif kind == "external":
        if "command" not in t:
            raise ConfigError("external target needs a command template")
        ext = ExternalTarget(
            command=t.get("command"),
            workdir=t.get("workdir", "."),
            output=t.get("output", "{output}"),
        )
    else:
        raise ConfigError(f"unknown target kind {kind!r}")

    h = cp["histogram"] if cp.has_section("histogram") else {}
    g = cp["grid"] if cp.has_section("grid") else {}
    m = cp["dissimilarity"] if cp.has_section("dissimilarity") else {}
    r = cp["run"] if cp.has_section("run") else {}

    def _get(section, key, default):
        return section.get(key, default) if hasattr(section, "get") else default

    return StudyConfig(
        descriptors=descriptors,
        stars=stars,
        step=step,
        seed=seed,
        synthetic=synth,
        external=ext,
        max_steps=max_steps,
        histogram_bins=int(_get(h, "bins", DEFAULT_HISTOGRAM_BINS)),
        divergence=str(_get(h, "divergence", DEFAULT_DIVERGENCE)).strip(),
        regional_bins=int(_get(h, "regional_bins", 10)),
        grid_dims=_ints(str(_get(g, "dims", "64,64,64")), 3),
        match_points=int(_get(m, "points_per_fiber", 500)),
        workers=int(_get(r, "workers", os.cpu_count() or 1)),
        cache_dir=_get(r, "cache_dir", None) or None,
    )


def config_fingerprint(cfg: StudyConfig) -> dict:
    """Canonical dict of everything that determines study outputs."""
    target: dict
    if cfg.synthetic is not None:
        sc = cfg.synthetic
        target = {
            "kind": "synthetic",
            "extent": list(sc.extent),
            "fiber_count": sc.fiber_count,
            "seed": sc.seed,
            "length_model": [sc.length_model.a, sc.length_model.b, sc.length_model.c, sc.length_model.d],
            "diameter_model": [
                sc.diameter_model.a, sc.diameter_model.b, sc.diameter_model.c, sc.diameter_model.d,
            ],
            "max_placement_attempts": sc.attempts,
        }
    else:
        target = {
            "kind": "external",
            "command": cfg.external.command,
            "workdir": cfg.external.workdir,
            "output": cfg.external.output,
        }
    return {
        "parameters": [[d.name, d.lo, d.hi] for d in cfg.descriptors],
        "sampling": {
            "stars": cfg.stars, "step": cfg.step, "seed": cfg.seed, "max_steps": cfg.max_steps,
        },
        "target": target,
    }
