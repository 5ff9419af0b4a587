"""Sources of uniform random bit strings for padding, keys and key-generation packets.

Every source logs the sizes it was asked for.  Both encoders request
randomness in an order fixed by the state sequence alone, which is what lets
the secrecy oracle swap in an enumerating source.
"""

from __future__ import annotations

import numpy as np


class BitSource:
    def __init__(self):
        self.requests = []

    def draw(self, nbits: int):
        if nbits < 0:
            raise ValueError(f"cannot draw {nbits} bits")
        self.requests.append(nbits)
        if nbits == 0:
            return 0
        return self._draw(nbits)

    def _draw(self, nbits):
        raise NotImplementedError

    @property
    def bits_consumed(self) -> int:
        return sum(self.requests)


class SeededBits(BitSource):
    """Reproducible bits from numpy's PCG64, seeded via ``SeedSequence``."""

    def __init__(self, seed=None, rng: np.random.Generator = None):
        super().__init__()
        if rng is None:
            rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
        self.rng = rng

    def _draw(self, nbits):
        nbytes = (nbits + 7) // 8
        value = int.from_bytes(self.rng.bytes(nbytes), "big")
        return value >> (8 * nbytes - nbits)


class ZeroBits(BitSource):
    """Always returns zero; used for dry runs that only record the request layout."""

    def _draw(self, nbits):
        return 0


class EnumeratedBits(BitSource):
    """Slices consecutive bit fields out of an array of randomness indices.

    Element ``r`` of ``index`` is one full realization of the ``total_bits``
    random bits; successive draws take successive fields, lowest bits first.
    """

    def __init__(self, index: np.ndarray, total_bits: int):
        super().__init__()
        self.index = index
        self.total_bits = total_bits
        self._offset = 0

    def _draw(self, nbits):
        if self._offset + nbits > self.total_bits:
            raise RuntimeError(
                f"randomness layout changed: asked for {self._offset + nbits} bits, "
                f"only {self.total_bits} enumerated"
            )
        field = (self.index >> self._offset) & ((1 << nbits) - 1)
        self._offset += nbits
        return field
