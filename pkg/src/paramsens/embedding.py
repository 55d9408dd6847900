"""Classical 2D multidimensional scaling of result dissimilarities."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Embedding2D:
    coordinates: np.ndarray  # (n, 2), centered
    stress: float  # normalized Kruskal stress-1
    trivial: bool = False  # n < 3 fallback layout


def _fix_signs(coords: np.ndarray) -> np.ndarray:
    # Eigenvectors are determined up to sign; flip each column so its first
    # nonzero entry is positive, making embeddings reproducible.
    for c in range(coords.shape[1]):
        col = coords[:, c]
        nz = np.nonzero(col)[0]
        if len(nz) and col[nz[0]] < 0:
            coords[:, c] = -col
    return coords


def _stress(dist_in: np.ndarray, coords: np.ndarray) -> float:
    diff = coords[:, None, :] - coords[None, :, :]
    emb = np.sqrt(np.sum(diff * diff, axis=-1))
    iu = np.triu_indices(len(coords), k=1)
    denom = float(np.sum(dist_in[iu] ** 2))
    if denom == 0.0:
        return 0.0
    return float(np.sqrt(np.sum((dist_in[iu] - emb[iu]) ** 2) / denom))


def mds(distances: np.ndarray, dims: int = 2) -> Embedding2D:
    """Classical (spectral) MDS: double centering plus top eigenpairs.

    Deterministic: eigenvector signs are fixed so repeated runs give the same
    coordinates. Negative eigenvalues are truncated to zero. For fewer than 3
    points a trivial centered layout with unit separation is returned.
    """
    d = np.asarray(distances, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError("distance matrix must be square")
    if not np.allclose(d, d.T):
        raise ValueError("distance matrix must be symmetric")
    if np.diag(d).any():
        raise ValueError("distance matrix must have a zero diagonal")
    if (d < 0).any():
        raise ValueError("distances must be nonnegative")
    n = d.shape[0]
    if n < 3:
        log.warning("fewer than 3 results: trivial MDS layout")
        coords = np.zeros((n, dims))
        if n == 2:
            coords[0, 0] = -0.5
            coords[1, 0] = 0.5
        return Embedding2D(coordinates=coords, stress=_stress(d, coords), trivial=True)

    j = np.eye(n) - np.ones((n, n)) / n
    b = -0.5 * j @ (d * d) @ j
    evals, evecs = np.linalg.eigh(b)
    order = np.argsort(evals)[::-1][:dims]
    lam = np.clip(evals[order], 0.0, None)
    coords = evecs[:, order] * np.sqrt(lam)[None, :]
    coords = _fix_signs(coords)
    coords = coords - coords.mean(axis=0)
    return Embedding2D(coordinates=coords, stress=_stress(d, coords))
