"""Canonical serialization and hashing shared by proofs and the board.

Everything hashed in this package goes through `digest`, which length-prefixes
each part and separates them with an explicit domain label, so transcripts from
different proof types or contexts can never collide.
"""

from __future__ import annotations

import hashlib
import json


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _part_bytes(part) -> bytes:
    if isinstance(part, bytes):
        return part
    if isinstance(part, str):
        return part.encode("utf-8")
    if isinstance(part, int):
        return str(part).encode("ascii")
    if hasattr(part, "value") and hasattr(part, "params"):  # GroupElement
        return str(part.value).encode("ascii")
    if hasattr(part, "a") and hasattr(part, "b"):  # Ciphertext
        return _part_bytes(part.a) + b"," + _part_bytes(part.b)
    if isinstance(part, (list, tuple)):
        return b"[" + b";".join(_part_bytes(x) for x in part) + b"]"
    raise TypeError(f"cannot hash part of type {type(part).__name__}")


def digest(label: str, *parts) -> bytes:
    h = hashlib.sha256()
    h.update(label.encode("utf-8"))
    for part in parts:
        raw = _part_bytes(part)
        h.update(len(raw).to_bytes(8, "big"))
        h.update(raw)
    return h.digest()


def fs_challenge(q: int, label: str, *parts) -> int:
    """Fiat-Shamir challenge in [0, q-1] bound to a domain label and statement."""
    return int.from_bytes(digest(label, *parts), "big") % q


def hash_hex(label: str, *parts) -> str:
    return digest(label, *parts).hex()
