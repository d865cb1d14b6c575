"""Counter-based keyed PRNG.

Draws are pure functions of (seed, key parts), not of call order, so
concurrent requests stay deterministic: the nth request for an asset
gets the same draw no matter what else ran in between. Uses BLAKE2b
rather than Python's hash() because the latter is salted per process.
"""

from __future__ import annotations

import hashlib


def keyed_u64(seed: int, *parts: object) -> int:
    """Return a uniform 64-bit integer keyed by seed and parts."""
    material = "|".join([str(seed)] + [str(p) for p in parts]).encode("utf-8")
    digest = hashlib.blake2b(material, digest_size=8).digest()
    return int.from_bytes(digest, "big")


def keyed_uniform(seed: int, *parts: object) -> float:
    """Return a uniform float in [0, 1) keyed by seed and parts."""
    return keyed_u64(seed, *parts) / 2**64
