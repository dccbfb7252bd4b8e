"""Seeded random tapes addressable by (stage, round, vertex, word).

Two modes:

* ``prf``: keyed BLAKE2b of the address, fast and the default.
* ``kwise``: a random degree-(k-1) polynomial over GF(2^64) evaluated at the
  packed address. Distinct addresses give k-wise independent, exactly
  uniform 64-bit words.
"""
from __future__ import annotations

import hashlib
import random
import struct

MASK64 = (1 << 64) - 1
# x^64 + x^4 + x^3 + x + 1
_REDUCTION = 0x1B

STAGE_BITS, ROUND_BITS, WORD_BITS, KEY_BITS = 5, 8, 3, 48


def derive_seed(seed: int, *labels: int) -> int:
    """Independent 64-bit child seed, e.g. one per sorter stage."""
    h = hashlib.blake2b(digest_size=8)
    h.update(struct.pack("<Q", seed & MASK64))
    for label in labels:
        h.update(struct.pack("<q", label))
    return int.from_bytes(h.digest(), "little")


def gf64_mul(a: int, b: int) -> int:
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    while r >> 64:
        hi = r >> 64
        r = (r & MASK64) ^ hi ^ (hi << 1) ^ (hi << 3) ^ (hi << 4)
    return r


def pack_address(stage: int, rnd: int, key: int, index: int) -> int:
    if not (0 <= stage < 1 << STAGE_BITS and 0 <= rnd < 1 << ROUND_BITS and 0 <= index < 1 << WORD_BITS and 0 <= key < 1 << KEY_BITS):
        raise ValueError(f"address ({stage}, {rnd}, {key}, {index}) out of range for k-wise tape")
    return ((stage << ROUND_BITS | rnd) << WORD_BITS | index) << KEY_BITS | key


class RandomTape:
    def __init__(self, seed: int, mode: str = "prf", k: int = 16):
        if mode not in ("prf", "kwise"):
            raise ValueError(f"unknown tape mode {mode!r}")
        self.seed = seed & MASK64
        self.mode = mode
        self.k = k
        self.reads = 0
        if mode == "kwise":
            rng = random.Random(self.seed)
            self.coeffs = [rng.getrandbits(64) for _ in range(k)]
        else:
            self._key = struct.pack("<Q", self.seed)

    def __repr__(self) -> str:
        return f"RandomTape(seed={self.seed}, mode={self.mode!r}" + (f", k={self.k})" if self.mode == "kwise" else ")")

    def word(self, stage: int, rnd: int, key: int, index: int = 0) -> int:
        self.reads += 1
        if self.mode == "kwise":
            x = pack_address(stage, rnd, key, index)
            acc = 0
            for c in self.coeffs:
                acc = gf64_mul(acc, x) ^ c
            return acc
        h = hashlib.blake2b(struct.pack("<qqq", stage, rnd, index) + key.to_bytes(16, "little"), digest_size=8, key=self._key)
        return int.from_bytes(h.digest(), "little")

    def bit(self, stage: int, rnd: int, key: int, index: int) -> int:
        return self.word(stage, rnd, key, index >> 6) >> (index & 63) & 1

    def marked(self, stage: int, rnd: int, key: int, j: int) -> bool:
        """True with probability 2^-j: the first j bits at this address are all zero."""
        index = 0
        while j > 0:
            take = min(j, 64)
            if self.word(stage, rnd, key, index) & ((1 << take) - 1):
                return False
            j -= take
            index += 1
        return True
