"""Single-file checkpoint format.

Layout:
    8 bytes   little-endian uint64, byte length of the JSON header
    N bytes   UTF-8 JSON header
    rest      raw little-endian array data, concatenated in header order

The header holds, per entry: name, shape, dtype ("<f4" or "<f8"), byte
offset into the blob, and trainable flag. A free-form "meta" dict rides
along for anything the caller wants to persist (normalization statistics,
training config, step counters). Writing the same arrays and meta twice
produces byte-identical files: JSON keys are sorted and floats in meta are
serialized by json with repr-level precision.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

__all__ = ["save_arrays", "load_arrays", "save_module", "load_module"]

_MAGIC_DTYPES = {"<f4", "<f8"}


def save_arrays(path: str | Path, arrays: dict[str, np.ndarray],
                trainable: dict[str, bool] | None = None,
                meta: dict | None = None) -> None:
    entries = []
    offset = 0
    blobs = []
    for name in sorted(arrays):
        arr = np.ascontiguousarray(arrays[name])
        dt = "<f4" if arr.dtype == np.float32 else "<f8"
        if arr.dtype not in (np.float32, np.float64):
            raise ValueError(f"unsupported dtype {arr.dtype} for '{name}'")
        raw = arr.astype(dt).tobytes()
        entries.append({
            "name": name,
            "shape": list(arr.shape),
            "dtype": dt,
            "offset": offset,
            "trainable": bool(trainable.get(name, True)) if trainable else True,
        })
        offset += len(raw)
        blobs.append(raw)
    header = json.dumps(
        {"version": 1, "entries": entries, "meta": meta or {}},
        sort_keys=True, separators=(",", ":"),
    ).encode("utf-8")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(struct.pack("<Q", len(header)))
        f.write(header)
        for raw in blobs:
            f.write(raw)


def load_arrays(path: str | Path) -> tuple[dict[str, np.ndarray], dict, dict[str, bool]]:
    """Returns (arrays, meta, trainable-flags)."""
    with open(path, "rb") as f:
        (hlen,) = struct.unpack("<Q", f.read(8))
        header = json.loads(f.read(hlen).decode("utf-8"))
        blob = f.read()
    if header.get("version") != 1:
        raise ValueError(f"unknown checkpoint version {header.get('version')!r}")
    arrays, flags = {}, {}
    for e in header["entries"]:
        if e["dtype"] not in _MAGIC_DTYPES:
            raise ValueError(f"bad dtype {e['dtype']!r} in checkpoint")
        n = int(np.prod(e["shape"])) if e["shape"] else 1
        itemsize = 4 if e["dtype"] == "<f4" else 8
        start = e["offset"]
        arr = np.frombuffer(blob[start:start + n * itemsize], dtype=e["dtype"])
        arrays[e["name"]] = arr.reshape(e["shape"]).copy()
        flags[e["name"]] = bool(e.get("trainable", True))
    return arrays, header.get("meta", {}), flags


def save_module(path: str | Path, module, meta: dict | None = None) -> None:
    """Persist every named parameter of a layer tree."""
    arrays, flags = {}, {}
    for name, p in module.named_parameters():
        arrays[name] = p.data
        flags[name] = p.trainable
    save_arrays(path, arrays, trainable=flags, meta=meta)


def load_module(path: str | Path, module) -> dict:
    """Load parameters into an already-built layer tree; returns meta.

    Shape or name mismatches raise so a silently wrong restore is impossible.
    """
    arrays, meta, _ = load_arrays(path)
    own = dict(module.named_parameters())
    missing = sorted(set(own) - set(arrays))
    extra = sorted(set(arrays) - set(own))
    if missing or extra:
        raise ValueError(f"checkpoint mismatch: missing={missing} extra={extra}")
    for name, p in own.items():
        arr = arrays[name]
        if tuple(arr.shape) != p.shape:
            raise ValueError(
                f"shape mismatch for '{name}': checkpoint {arr.shape} vs model {p.shape}"
            )
        p.data[...] = arr.astype(p.data.dtype)
    return meta
