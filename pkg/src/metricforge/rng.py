"""Platform-independent 64-bit splitmix stream and seed derivation.

The noise functions need a generator that gives the same bits everywhere
for the same seed, independent of numpy's bit-generator versions.
"""

import hashlib
import struct

import numpy as np

GOLDEN_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


def splitmix64(seed: int, n: int) -> np.ndarray:
    """First ``n`` outputs of splitmix64 started at ``seed`` (uint64 array)."""
    state = np.uint64(seed & _MASK)
    steps = np.arange(1, n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = state + steps * GOLDEN_GAMMA
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        z = z ^ (z >> np.uint64(31))
    return z


def uniform_stream(seed: int, n: int) -> np.ndarray:
    """``n`` doubles in [0, 1) with 53 random bits each."""
    bits = splitmix64(seed, n) >> np.uint64(11)
    return bits.astype(np.float64) * (1.0 / (1 << 53))


def float_seed(value: float) -> int:
    """Reinterpret the IEEE-754 bits of a double as an unsigned seed."""
    return struct.unpack("<Q", struct.pack("<d", float(value)))[0]


def hashed_seed(x, y) -> int:
    """Order-sensitive seed from the exact byte representations of two vectors."""
    h = hashlib.blake2b(digest_size=8, person=b"mforge-noise")
    xb = np.ascontiguousarray(x, dtype="<f8").tobytes()
    yb = np.ascontiguousarray(y, dtype="<f8").tobytes()
    h.update(len(xb).to_bytes(4, "little"))
    h.update(xb)
    h.update(yb)
    return int.from_bytes(h.digest(), "little")
