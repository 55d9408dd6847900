"""Deterministic synthetic fiber generator and analytic oracle functions.

Fibers are packed by random sequential adsorption (RSA): tube proposals are
drawn from a counter-based seeded generator and accepted only when they
overlap no previously accepted tube and lie fully inside the volume. Two
input parameters drive hyperbolic-tangent response models, one for fiber
length and one for fiber diameter, so the influence of each input on each
output characteristic is known by construction.

The Gaussian oracle functions provide a scalar testbed with a closed-form
derivative against which the star-sampling sensitivity estimator can be
verified.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .fibers import Fiber, FiberResult, build_result

log = logging.getLogger(__name__)

# Relative per-fiber length jitter; diameters carry no jitter so all fibers
# of a result share one diameter.
LENGTH_JITTER = 0.05
# Lateral bow amplitude range as a fraction of fiber length.
BOW_FRACTION = (0.005, 0.02)

DEFAULT_LENGTH_MODEL = None  # set below
DEFAULT_DIAMETER_MODEL = None


@dataclass(frozen=True)
class TanhModel:
    """Response model a + b*tanh(c*(x + d))."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if self.b == 0 or self.c == 0:
            raise ValueError("tanh model needs b != 0 and c != 0")

    def value(self, x: float) -> float:
        return self.a + self.b * math.tanh(self.c * (x + self.d))


DEFAULT_LENGTH_MODEL = TanhModel(a=215.0, b=15.0, c=5.0, d=-0.5)
DEFAULT_DIAMETER_MODEL = TanhModel(a=7.0, b=0.5, c=8.0, d=-0.3)


@dataclass(frozen=True)
class GaussianOracle:
    """Normalized Gaussian bell used as analytic sensitivity testbed."""

    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be > 0")


def gaussian(x: float, o: GaussianOracle) -> float:
    z = (x - o.mu) / o.sigma
    return math.exp(-0.5 * z * z) / (o.sigma * math.sqrt(2.0 * math.pi))


def gaussian_derivative(x: float, o: GaussianOracle) -> float:
    """First-order derivative of the Gaussian bell."""
    return -(x - o.mu) / (o.sigma * o.sigma) * gaussian(x, o)


def interval_variance(o: GaussianOracle, t: float, n_quad: int = 512) -> float:
    """Variance of the bell over [-t, t] by Gauss-Legendre quadrature.

    The in-window mean is mass-normalized; the variance integral itself is
    taken literally against the function values, so for a wide window around
    a unit-mass bell the value approaches sigma^2.
    """
    if not t > 0:
        raise ValueError("t must be > 0")
    if n_quad < 16:
        raise ValueError("n_quad must be >= 16")
    nodes, weights = np.polynomial.legendre.leggauss(n_quad)
    x = nodes * t
    w = weights * t
    f = np.exp(-0.5 * ((x - o.mu) / o.sigma) ** 2) / (o.sigma * math.sqrt(2.0 * math.pi))
    mass = float(np.sum(w * f))
    if mass == 0.0:
        return 0.0
    mean = float(np.sum(w * x * f)) / mass
    return float(np.sum(w * (x - mean) ** 2 * f))


@dataclass(frozen=True)
class SynthConfig:
    """Settings of one synthetic generation run."""

    extent: tuple[float, float, float] = (300.0, 300.0, 300.0)
    fiber_count: int = 80
    seed: int = 0
    length_model: TanhModel = DEFAULT_LENGTH_MODEL
    diameter_model: TanhModel = DEFAULT_DIAMETER_MODEL
    max_placement_attempts: int | None = None  # default 200 * fiber_count

    def __post_init__(self):
        if self.fiber_count < 1:
            raise ValueError("fiber_count must be >= 1")
        if any(e <= 0 for e in self.extent):
            raise ValueError("extent must be positive in all axes")

    @property
    def attempts(self) -> int:
        if self.max_placement_attempts is not None:
            return self.max_placement_attempts
        return 200 * self.fiber_count


def _segment_pairs_dist2(p1, q1, p2, q2):
    """Squared minimum distance between all segment pairs (broadcast on the
    leading axes). Clamped closest-point solution; degenerate segments fall
    back to endpoint distances."""
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = np.sum(d1 * d1, axis=-1)
    e = np.sum(d2 * d2, axis=-1)
    b = np.sum(d1 * d2, axis=-1)
    c = np.sum(d1 * r, axis=-1)
    f = np.sum(d2 * r, axis=-1)
    denom = a * e - b * b
    s = np.where(denom > 0, np.clip((b * f - c * e) / np.where(denom == 0, 1, denom), 0, 1), 0.0)
    t = np.where(e > 0, (b * s + f) / np.where(e == 0, 1, e), 0.0)
    t = np.clip(t, 0.0, 1.0)
    s = np.where(a > 0, np.clip((b * t - c) / np.where(a == 0, 1, a), 0, 1), 0.0)
    closest1 = p1 + s[..., None] * d1
    closest2 = p2 + t[..., None] * d2
    diff = closest1 - closest2
    return np.sum(diff * diff, axis=-1)


def _propose(k: int, cfg: SynthConfig, length_base: float, radius: float):
    """Tube proposal number k. The whole geometry comes from a counter-based
    substream, so proposal k is identical across runs that differ only in the
    response-model inputs; only length/radius scale with them."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed, spawn_key=(k,))))
    extent = np.asarray(cfg.extent)
    center = rng.random(3) * extent
    z = 2.0 * rng.random() - 1.0
    phi = 2.0 * math.pi * rng.random()
    rho = math.sqrt(max(0.0, 1.0 - z * z))
    direction = np.array([rho * math.cos(phi), rho * math.sin(phi), z])
    n_vertices = int(rng.integers(3, 6))
    length = length_base * (1.0 + LENGTH_JITTER * (2.0 * rng.random() - 1.0))
    bow_phase = 2.0 * math.pi * rng.random()
    lo, hi = BOW_FRACTION
    bow_amp = length * (lo + (hi - lo) * rng.random())

    # orthonormal frame perpendicular to the axis
    ref = np.array([0.0, 0.0, 1.0]) if abs(direction[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    u = np.cross(direction, ref)
    u /= np.linalg.norm(u)
    v = np.cross(direction, u)
    bow_dir = math.cos(bow_phase) * u + math.sin(bow_phase) * v

    ts = np.linspace(0.0, 1.0, n_vertices)
    vertices = (
        center[None, :]
        + (ts - 0.5)[:, None] * length * direction[None, :]
        + (bow_amp * np.sin(math.pi * ts))[:, None] * bow_dir[None, :]
    )
    return vertices, radius


def generate(param1: float, param2: float, cfg: SynthConfig, result_id: int = 0) -> FiberResult:
    """Generate one fiber result by RSA packing; pure function of its inputs.

    param1 drives the length model, param2 the diameter model; both must lie
    in [0, 1]. If the attempt budget runs out before `fiber_count` tubes are
    accepted the shorter result is returned and a warning logged.
    """
    if not (0.0 <= param1 <= 1.0 and 0.0 <= param2 <= 1.0):
        raise ValueError("param1 and param2 must lie in [0, 1]")
    length_base = cfg.length_model.value(param1)
    radius = cfg.diameter_model.value(param2) / 2.0
    if length_base <= 0 or radius <= 0:
        raise ValueError("response models must yield positive length and diameter")

    extent = np.asarray(cfg.extent)
    fibers: list[Fiber] = []
    seg_p: list[np.ndarray] = []  # accepted segment start points
    seg_q: list[np.ndarray] = []
    seg_r: list[float] = []  # radius per accepted segment

    attempts = 0
    while len(fibers) < cfg.fiber_count and attempts < cfg.attempts:
        vertices, r = _propose(attempts, cfg, length_base, radius)
        attempts += 1
        if (vertices < r).any() or (vertices > extent - r).any():
            continue
        p = vertices[:-1]
        q = vertices[1:]
        if seg_p:
            ap = np.concatenate(seg_p)
            aq = np.concatenate(seg_q)
            ar = np.asarray(seg_r)
            d2 = _segment_pairs_dist2(p[:, None, :], q[:, None, :], ap[None, :, :], aq[None, :, :])
            if (d2 < (ar[None, :] + r) ** 2).any():
                continue
        fibers.append(Fiber(fiber_id=len(fibers), vertices=vertices, radius=r))
        seg_p.append(p)
        seg_q.append(q)
        seg_r.extend([r] * len(p))

    if len(fibers) < cfg.fiber_count:
        log.warning(
            "placement attempts exhausted: %d of %d fibers placed (result %d)",
            len(fibers), cfg.fiber_count, result_id,
        )
    return build_result(result_id, fibers)
