"""Canonical byte encodings shared by signatures, hashes, and persistence.

Every signature and hash in the system operates on canonical JSON: UTF-8,
lexicographically sorted keys, no insignificant whitespace. Binary fields
are lowercase hex so the encoding round-trips through text transports.
"""

from __future__ import annotations

import hashlib
import json
import re
from typing import Any

_HEX_RE = re.compile(r"^(?:[0-9a-f]{2})*$")


def canonical_json_bytes(obj: Any) -> bytes:
    """Encode ``obj`` as canonical JSON bytes."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def to_hex(data: bytes) -> str:
    return data.hex()


def from_hex(text: str) -> bytes:
    """Decode lowercase hex, rejecting anything else.

    Strictness matters for tamper evidence: ``bytes.fromhex`` accepts
    uppercase, so a single-bit case flip in a persisted hex field would
    otherwise decode to the same bytes and go unnoticed.
    """
    if not isinstance(text, str) or not _HEX_RE.fullmatch(text):
        raise ValueError(f"not canonical lowercase hex: {text!r}")
    return bytes.fromhex(text)
