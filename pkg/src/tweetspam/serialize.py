"""Canonical JSON rendering and atomic file writes.

Model and report files must be byte-reproducible across runs: object keys
are sorted and every float is rendered with a fixed 17-significant-digit
format, so identical in-memory state always produces identical bytes.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile

import numpy as np


def format_float(value: float) -> str:
    """Render a float with 17 significant digits (round-trip exact)."""
    value = float(value)
    if math.isnan(value) or math.isinf(value):
        raise ValueError("non-finite value cannot be serialized")
    if value == 0.0:
        return "0"  # normalize -0.0 so reload/re-save is byte-stable
    return format(value, ".17g")


def canonical_json(obj) -> str:
    """Serialize to a canonical JSON string (sorted keys, fixed floats)."""
    parts: list[str] = []
    _render(obj, parts)
    return "".join(parts)


def _render(obj, parts: list[str]) -> None:
    if obj is None:
        parts.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        parts.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        parts.append(format_float(obj))
    elif isinstance(obj, str):
        parts.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        parts.append("{")
        for i, key in enumerate(sorted(obj)):
            if not isinstance(key, str):
                raise TypeError(f"non-string key {key!r} in canonical JSON")
            if i:
                parts.append(",")
            parts.append(json.dumps(key, ensure_ascii=False))
            parts.append(":")
            _render(obj[key], parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple)):
        parts.append("[")
        for i, item in enumerate(obj):
            if i:
                parts.append(",")
            _render(item, parts)
        parts.append("]")
    elif isinstance(obj, np.ndarray):
        _render(obj.tolist(), parts)
    else:
        raise TypeError(f"cannot canonicalize {type(obj).__name__}")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def atomic_write_bytes(path: str, data: bytes) -> None:
    """Write via temp file + rename so readers never see partial output."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))
