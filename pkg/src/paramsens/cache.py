"""Content-addressed on-disk cache for derived study artifacts.

Keys are SHA-256 digests over canonicalized inputs (never timestamps), so a
cache hit is byte-identical to a fresh computation and caches are portable
across machines. Each artifact is a single payload file next to a small meta
file carrying the creation time; corrupt payloads are recomputed
transparently.
"""

from __future__ import annotations

import hashlib
import io
import json
import logging
import time
import zipfile
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

# Bump when a change in derivation code invalidates cached artifacts.
PIPELINE_VERSION = "1"


def canonical_json(obj) -> str:
    """Stable text form: sorted keys, floats via repr (round-trip exact)."""

    def default(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.integer,)):
            return int(o)
        if isinstance(o, (np.floating,)):
            return float(o)
        raise TypeError(f"not canonicalizable: {type(o)}")

    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=default)


def digest(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()[:32]


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()[:32]


def save_arrays(path, arrays: dict) -> None:
    """Write a dict of numpy arrays as a zip of .npy entries with fixed
    timestamps, so identical arrays give identical bytes."""
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_STORED) as z:
        for name in sorted(arrays):
            entry = io.BytesIO()
            np.lib.format.write_array(entry, np.asarray(arrays[name]))
            info = zipfile.ZipInfo(name + ".npy", date_time=(1980, 1, 1, 0, 0, 0))
            z.writestr(info, entry.getvalue())
    Path(path).write_bytes(buf.getvalue())


def load_arrays(path) -> dict:
    out = {}
    with np.load(path) as z:
        for name in z.files:
            out[name] = z[name]
    return out


class DiskCache:
    """Artifact store: one payload file per (kind, key)."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def payload_path(self, kind: str, key: str, ext: str = "npz") -> Path:
        return self.root / f"{kind}-{key}.{ext}"

    def _meta_path(self, kind: str, key: str) -> Path:
        return self.root / f"{kind}-{key}.meta.json"

    def load(self, kind: str, key: str, loader, ext: str = "npz"):
        """Return the cached value or None; corrupt entries are dropped."""
        path = self.payload_path(kind, key, ext)
        if not path.exists():
            return None
        try:
            return loader(path)
        except Exception as exc:  # noqa: BLE001 - any corruption means recompute
            log.warning("corrupt cache entry %s (%s): recomputing", path.name, exc)
            path.unlink(missing_ok=True)
            self._meta_path(kind, key).unlink(missing_ok=True)
            return None

    def store(self, kind: str, key: str, writer, ext: str = "npz") -> Path:
        path = self.payload_path(kind, key, ext)
        writer(path)
        self._meta_path(kind, key).write_text(
            json.dumps({"kind": kind, "key": key, "created": time.time()}) + "\n"
        )
        return path

    def get_or_compute(self, kind: str, key: str, compute, ext: str = "npz"):
        """Arrays-valued artifact: load if cached, else compute and persist."""
        value = self.load(kind, key, load_arrays, ext)
        if value is not None:
            return value
        value = compute()
        self.store(kind, key, lambda p: save_arrays(p, value), ext)
        return value
