"""Stateless seed derivation.

Every random stream in a campaign is keyed by a tuple such as
``(root, "flood", n, k, trial, round)`` and mixed with BLAKE2b into a 64-bit
seed, so a stream never depends on which worker ran it or in what order.
"""

from __future__ import annotations

import hashlib
import random


def derive_seed(root: int, *keys: object) -> int:
    payload = "\x1f".join([str(int(root))] + [repr(k) for k in keys]).encode()
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


def make_rng(root: int, *keys: object) -> random.Random:
    return random.Random(derive_seed(root, *keys))
