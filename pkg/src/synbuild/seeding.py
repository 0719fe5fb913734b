"""Named-stream random number generation.

Every stochastic choice draws from a generator keyed by ``(seed, name)``, so
adding a new parameter never shifts the draws of existing ones, and task
seeds never depend on scheduling order.
"""

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def derive_seed(*parts):
    """Stable 64-bit seed from any mix of ints and strings."""
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        h.update(repr(p).encode())
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little") & MASK64


def stream(seed, name):
    return np.random.Generator(np.random.PCG64(derive_seed(int(seed) & MASK64, name)))
