"""Hierarchical seed derivation.

A :class:`SeedPath` is a master seed plus a list of ``(label, index)``
steps. The integer that seeds a stream is the first 8 bytes of the
BLAKE2b digest of the JSON encoding ``[master, [[label, index], ...]]``.
That encoding is part of the reproducibility contract: changing it
changes every dataset this package has ever produced.
"""

import hashlib
import json
import os
import random
from dataclasses import dataclass

ENV_SEED = "D3FORGE_SEED"
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SeedPath:
    master: int
    path: tuple = ()

    def __post_init__(self):
        if not 0 <= self.master <= _MASK64:
            raise ValueError(f"master seed {self.master} is not a 64-bit unsigned integer")

    def child(self, label, index=0):
        return derive_seed(self, label, index)

    def stream_seed(self):
        payload = json.dumps([self.master, [list(step) for step in self.path]], separators=(",", ":"))
        digest = hashlib.blake2b(payload.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "big")

    def rng(self):
        return random.Random(self.stream_seed())

    def __str__(self):
        steps = "/".join(f"{label}:{index}" for label, index in self.path)
        return f"{self.master}/{steps}" if steps else str(self.master)


def derive_seed(parent, label, index=0):
    if index < 0:
        raise ValueError("seed index must be nonnegative")
    return SeedPath(parent.master, parent.path + ((str(label), int(index)),))


def as_seed(seed):
    """Accept a SeedPath or a bare integer master seed."""
    if isinstance(seed, SeedPath):
        return seed
    return SeedPath(int(seed) & _MASK64)


def as_rng(seed):
    """A ``random.Random`` for a SeedPath or integer; an existing Random passes through."""
    if isinstance(seed, random.Random):
        return seed
    return as_seed(seed).rng()


def master_seed_from_env(default=0):
    value = os.environ.get(ENV_SEED)
    return int(value) if value not in (None, "") else default
