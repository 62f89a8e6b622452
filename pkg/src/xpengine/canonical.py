"""Canonical serialization and content digests.

Every digest in the engine (CAW fingerprints, task cache keys, dataset
digests, knowledge-graph snapshots) is SHA-256 over the same canonical JSON
form: UTF-8, keys sorted lexicographically, no insignificant whitespace.
Keeping this in one place is what makes fingerprints comparable across the
executor, the cache, and the knowledge repository.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any


def canonical_json(obj: Any) -> str:
    """Serialize *obj* to canonical JSON (sorted keys, compact, non-ASCII kept)."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def canonical_bytes(obj: Any) -> bytes:
    return canonical_json(obj).encode("utf-8")


def sha256_hex(data: bytes | str) -> str:
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()


def digest_obj(obj: Any) -> str:
    """SHA-256 hex digest of the canonical JSON form of *obj*."""
    return sha256_hex(canonical_bytes(obj))


def digest_file(path: str | Path) -> str:
    """SHA-256 hex digest of a file's contents, streamed."""
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()
