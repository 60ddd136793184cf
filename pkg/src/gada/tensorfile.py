"""Read and write the shared tensor-file format.

A tensor file is one line of UTF-8 JSON describing the tensors, a newline,
then every tensor's little-endian payload in declared order::

    {"tensors": [{"name": "keys", "dtype": "f32", "shape": [3, 128]}, ...], ...}

Only ``f32`` and ``i32`` payloads are supported. Extra top-level header keys
(``"meta"``) carry small JSON metadata such as a dictionary policy.
"""
from __future__ import annotations

import json
import os
from typing import Any, Mapping

import numpy as np

_DTYPES = {"f32": np.dtype("<f4"), "i32": np.dtype("<i4")}


class TensorFileError(ValueError):
    """Malformed or truncated tensor file."""


def _dtype_tag(arr: np.ndarray) -> str:
    if np.issubdtype(arr.dtype, np.integer) or arr.dtype == np.bool_:
        return "i32"
    if np.issubdtype(arr.dtype, np.floating):
        return "f32"
    raise TypeError(f"unsupported dtype {arr.dtype}")


def save_tensors(path: str | os.PathLike, tensors: Mapping[str, np.ndarray],
                 meta: Mapping[str, Any] | None = None) -> None:
    """Write ``tensors`` (name -> array) to ``path`` in declaration order."""
    entries = []
    blobs = []
    for name, value in tensors.items():
        arr = np.asarray(value)
        tag = _dtype_tag(arr)
        entries.append({"name": name, "dtype": tag, "shape": list(arr.shape)})
        blobs.append(np.ascontiguousarray(arr, dtype=_DTYPES[tag]).tobytes())
    header: dict[str, Any] = {"tensors": entries}
    if meta:
        header["meta"] = dict(meta)
    try:
        with open(path, "wb") as fh:
            fh.write(json.dumps(header).encode("utf-8"))
            fh.write(b"\n")
            for blob in blobs:
                fh.write(blob)
    except OSError as exc:
        raise OSError(f"cannot write tensor file {os.fspath(path)!r}: {exc}") from exc


def load_tensors(path: str | os.PathLike) -> tuple[dict[str, np.ndarray], dict[str, Any]]:
    """Return ``(tensors, meta)`` read from ``path``.

    Float tensors come back as float64 and integer tensors as int64 so callers
    compute at full precision; the stored values round-trip exactly.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    nl = raw.find(b"\n")
    if nl < 0:
        raise TensorFileError(f"{os.fspath(path)!r}: missing header line")
    try:
        header = json.loads(raw[:nl].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise TensorFileError(f"{os.fspath(path)!r}: bad header: {exc}") from exc
    offset = nl + 1
    out: dict[str, np.ndarray] = {}
    for entry in header.get("tensors", []):
        dt = _DTYPES.get(entry["dtype"])
        if dt is None:
            raise TensorFileError(f"unknown dtype {entry['dtype']!r}")
        shape = tuple(int(s) for s in entry["shape"])
        count = int(np.prod(shape, dtype=np.int64))
        nbytes = count * dt.itemsize
        if offset + nbytes > len(raw):
            raise TensorFileError(f"{os.fspath(path)!r}: truncated tensor {entry['name']!r}")
        arr = np.frombuffer(raw, dtype=dt, count=count, offset=offset).reshape(shape)
        out[entry["name"]] = arr.astype(np.float64 if entry["dtype"] == "f32" else np.int64)
        offset += nbytes
    return out, dict(header.get("meta", {}))
