"""Content-addressed caching of computed artifacts and atomic report persistence.

Cache entries carry a format version and an embedded digest; a mismatch makes
the entry read as absent instead of propagating stale or corrupt data.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import warnings
from pathlib import Path

import numpy as np

from .errors import CorruptEntry, IoFailure
from .geometry import canonical_json, spec_from_json
from .potential import ScalarField

FORMAT_VERSION = 1
CACHE_ENV = "BERGMAN_LAB_CACHE"


def cache_key(payload: dict) -> str:
    """Stable 64-bit hex digest of a canonical-JSON payload."""
    return hashlib.blake2b(canonical_json(payload).encode(), digest_size=8).hexdigest()


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    return Path(env) if env else Path("cache")


class Store:
    """cache/<hex>.bin blobs plus reports/<stamp>/*.json and tables/*.csv."""

    def __init__(self, root: str | os.PathLike | None = None):
        self.root = Path(root) if root is not None else default_cache_dir()

    def _path(self, key: str) -> Path:
        return self.root / f"{key}.bin"

    def put(self, key: str, blob: bytes) -> None:
        try:
            self.root.mkdir(parents=True, exist_ok=True)
            header = json.dumps({
                "version": FORMAT_VERSION,
                "digest": hashlib.blake2b(blob, digest_size=16).hexdigest(),
                "length": len(blob),
            }).encode()
            target = self._path(key)
            fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".tmp-", suffix=".bin")
            try:
                with os.fdopen(fd, "wb") as f:
                    f.write(header + b"\n" + blob)
                os.replace(tmp, target)
            finally:
                if os.path.exists(tmp):
                    os.unlink(tmp)
        except OSError as exc:
            raise IoFailure(str(exc)) from exc

    def get(self, key: str) -> bytes | None:
        path = self._path(key)
        if not path.exists():
            return None
        try:
            raw = path.read_bytes()
            nl = raw.index(b"\n")
            header = json.loads(raw[:nl])
            blob = raw[nl + 1:]
            if header.get("version") != FORMAT_VERSION:
                return None
            if header.get("length") != len(blob):
                raise CorruptEntry("length mismatch")
            digest = hashlib.blake2b(blob, digest_size=16).hexdigest()
            if digest != header.get("digest"):
                raise CorruptEntry("digest mismatch")
            return blob
        except CorruptEntry as exc:
            warnings.warn(f"cache entry {key} unreadable ({exc}); treating as absent")
            return None
        except (ValueError, json.JSONDecodeError, OSError) as exc:
            warnings.warn(f"cache entry {key} unreadable ({exc}); treating as absent")
            return None


# ---------------------------------------------------------------------------
# scalar field serialization: JSON header + CSV rows
# ---------------------------------------------------------------------------

def _fmt(v: float) -> str:
    return "%.17g" % v


def field_to_bytes(fld: ScalarField) -> bytes:
    grid = fld.grid
    meta = {}
    for k, v in fld.meta.items():
        if isinstance(v, complex):
            meta[k] = [v.real, v.imag]
        else:
            meta[k] = v
    header = {
        "version": FORMAT_VERSION,
        "spec": grid.spec.to_json(),
        "h": repr(grid.h),
        "origin": [repr(grid.origin[0]), repr(grid.origin[1])],
        "shape": list(grid.mask.shape),
        "kind": fld.kind,
        "meta": meta,
        "fingerprint": grid.fingerprint,
    }
    lines = [canonical_json(header)]
    vals = fld.values
    for i in range(vals.shape[0]):
        lines.append(",".join(_fmt(v) for v in vals[i]))
    return ("\n".join(lines) + "\n").encode()


def field_from_bytes(raw: bytes) -> ScalarField:
    from .geometry import rasterize  # local import to avoid cycles

    text = raw.decode()
    nl = text.index("\n")
    header = json.loads(text[:nl])
    if header.get("version") != FORMAT_VERSION:
        raise CorruptEntry("unsupported field format version")
    spec = spec_from_json(header["spec"])
    h = float(header["h"])
    rows = text[nl + 1:].strip("\n").split("\n")
    vals = np.array([[float(x) for x in row.split(",")] for row in rows])
    grid = rasterize(spec, h)
    if list(grid.mask.shape) != header["shape"]:
        raise CorruptEntry("grid shape mismatch on reload")
    meta = {}
    for k, v in header.get("meta", {}).items():
        if isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
            meta[k] = complex(v[0], v[1])
        else:
            meta[k] = v
    return ScalarField(grid=grid, values=vals, kind=header["kind"], meta=meta)


# ---------------------------------------------------------------------------
# basis serialization: JSON header + little-endian float64 factor
# ---------------------------------------------------------------------------

def basis_to_bytes(basis) -> bytes:
    header = {
        "version": FORMAT_VERSION,
        "spec": basis.spec.to_json(),
        "quad_fingerprint": basis.quad_fingerprint,
        "exponents": np.asarray(basis.exponents).tolist(),
        "piv": np.asarray(basis.piv).tolist(),
        "center": [basis.center.real, basis.center.imag],
        "scale": repr(basis.scale),
        "pivot_log": list(basis.pivot_log),
        "dim": int(basis.dim),
    }
    L = np.ascontiguousarray(basis.lower, dtype=np.complex128)
    payload = L.view(np.float64).astype("<f8").tobytes()
    return canonical_json(header).encode() + b"\n" + payload


def basis_from_bytes(raw: bytes):
    from .bergman.basis import OrthoBasis

    nl = raw.index(b"\n")
    header = json.loads(raw[:nl])
    if header.get("version") != FORMAT_VERSION:
        raise CorruptEntry("unsupported basis format version")
    dim = int(header["dim"])
    payload = raw[nl + 1:]
    flat = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    L = flat.view(np.complex128).reshape(dim, dim)
    exps = np.asarray(header["exponents"])
    if exps.ndim == 2:
        exps = exps.astype(int)
    else:
        exps = exps.astype(float)
    return OrthoBasis(
        spec=spec_from_json(header["spec"]),
        exponents=exps,
        center=complex(header["center"][0], header["center"][1]),
        scale=float(header["scale"]),
        lower=L,
        piv=np.asarray(header["piv"], dtype=int),
        quad_fingerprint=header["quad_fingerprint"],
        pivot_log=tuple(tuple(x) if isinstance(x, list) else x for x in header["pivot_log"]),
    )


# ---------------------------------------------------------------------------
# reports and tables
# ---------------------------------------------------------------------------

def write_json_atomic(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    data = json.dumps(obj, sort_keys=True, indent=2)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
    with os.fdopen(fd, "w") as f:
        f.write(data + "\n")
    os.replace(tmp, path)


def write_table_csv(path: Path, header: list, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".csv")
    with os.fdopen(fd, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row) + "\n")
    os.replace(tmp, path)
