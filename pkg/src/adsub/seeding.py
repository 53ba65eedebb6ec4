"""Stable seed derivation.

Python's builtin hash is salted per process, so all derived seeds go
through sha256 of a canonical repr; equal inputs give equal streams in
every process, which keeps parallel and sequential runs byte-identical.
"""

from __future__ import annotations

import hashlib


def derive_seed(*parts) -> int:
    payload = repr(parts).encode("utf-8")
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "big")
