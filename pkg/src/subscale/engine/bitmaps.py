"""Per-element membership bitmaps: bit ``j`` says the element belongs to subgraph slot ``j``."""

from __future__ import annotations

import math
from array import array

BITMAP_KINDS = ("growable", "word", "sparse")


class Bitmap:
    """Fixed-capacity bitmap interface; out-of-range indices raise ``IndexError``."""

    kind = ""

    def __init__(self, capacity: int):
        if capacity < 0:
            raise ValueError("capacity must be non-negative")
        self.capacity = capacity

    def _check(self, i):
        if not 0 <= i < self.capacity:
            raise IndexError(f"bit {i} outside bitmap of capacity {self.capacity}")

    def set(self, i):
        raise NotImplementedError

    def test(self, i) -> bool:
        raise NotImplementedError

    def clear(self, i):
        raise NotImplementedError

    def clear_all(self):
        raise NotImplementedError

    def count(self) -> int:
        raise NotImplementedError

    def memory_estimate(self) -> int:
        """Approximate bytes held by the bit storage."""
        raise NotImplementedError

    def bits(self) -> list:
        return [i for i in range(self.capacity) if self.test(i)]


class GrowableBitmap(Bitmap):
    """Backed by one Python integer that widens as high bits are set."""

    kind = "growable"
    __slots__ = ("capacity", "_v")

    def __init__(self, capacity):
        super().__init__(capacity)
        self._v = 0

    def set(self, i):
        self._check(i)
        self._v |= 1 << i

    def test(self, i):
        self._check(i)
        return (self._v >> i) & 1 == 1

    def clear(self, i):
        self._check(i)
        self._v &= ~(1 << i)

    def clear_all(self):
        self._v = 0

    def count(self):
        return bin(self._v).count("1")

    def memory_estimate(self):
        return 16 + 8 * math.ceil(self._v.bit_length() / 64)

    def bits(self):
        v, out, i = self._v, [], 0
        while v:
            if v & 1:
                out.append(i)
            v >>= 1
            i += 1
        return out


class WordBitmap(Bitmap):
    """Dense array of 64-bit words sized for the full capacity up front."""

    kind = "word"
    __slots__ = ("capacity", "_w")

    def __init__(self, capacity):
        super().__init__(capacity)
        self._w = array("Q", bytes(8 * math.ceil(capacity / 64)))

    def set(self, i):
        self._check(i)
        self._w[i >> 6] |= 1 << (i & 63)

    def test(self, i):
        self._check(i)
        return (self._w[i >> 6] >> (i & 63)) & 1 == 1

    def clear(self, i):
        self._check(i)
        self._w[i >> 6] &= ~(1 << (i & 63)) & 0xFFFFFFFFFFFFFFFF

    def clear_all(self):
        w = self._w
        for j in range(len(w)):
            w[j] = 0

    def count(self):
        return sum(bin(x).count("1") for x in self._w)

    def memory_estimate(self):
        return 16 + 8 * len(self._w)


class SparseBitmap(Bitmap):
    """Set bits kept in hash buckets ``i % nbuckets``; cheap when few bits are set."""

    kind = "sparse"
    __slots__ = ("capacity", "_buckets", "_n")

    def __init__(self, capacity, nbuckets=8):
        super().__init__(capacity)
        self._buckets = [None] * max(1, min(nbuckets, capacity or 1))
        self._n = 0

    def set(self, i):
        self._check(i)
        b = i % len(self._buckets)
        bucket = self._buckets[b]
        if bucket is None:
            bucket = self._buckets[b] = set()
        if i not in bucket:
            bucket.add(i)
            self._n += 1

    def test(self, i):
        self._check(i)
        bucket = self._buckets[i % len(self._buckets)]
        return bucket is not None and i in bucket

    def clear(self, i):
        self._check(i)
        bucket = self._buckets[i % len(self._buckets)]
        if bucket is not None and i in bucket:
            bucket.remove(i)
            self._n -= 1

    def clear_all(self):
        self._buckets = [None] * len(self._buckets)
        self._n = 0

    def count(self):
        return self._n

    def memory_estimate(self):
        return 16 + 8 * len(self._buckets) + 4 * self._n

    def bits(self):
        return sorted(i for b in self._buckets if b for i in b)


_KINDS = {"growable": GrowableBitmap, "word": WordBitmap, "sparse": SparseBitmap}


def make_bitmap(kind: str, capacity: int) -> Bitmap:
    try:
        return _KINDS[kind](capacity)
    except KeyError:
        raise ValueError(f"unknown bitmap kind {kind!r}; pick one of {', '.join(BITMAP_KINDS)}") from None
