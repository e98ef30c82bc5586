"""Min-hash shingle signatures and the greedy orderings built on them."""

from __future__ import annotations

import random

MERSENNE_61 = (1 << 61) - 1
_MASK64 = (1 << 64) - 1


def mix64(v: int) -> int:
    """splitmix64 finalizer; scatters consecutive ids before the linear hashes see them."""
    z = (v + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class HashFamily:
    """``h`` hashes ``(a*mix64(v) + b) mod (2^61 - 1)``.

    Plain linear hashes are far from min-wise independent on runs of
    consecutive ids, which skews the match rate below the Jaccard similarity.
    """

    def __init__(self, h=6, seed=0):
        if h < 1:
            raise ValueError("need at least one hash function")
        rng = random.Random(f"shingles:{seed}")
        self.params = [(rng.randrange(1, MERSENNE_61), rng.randrange(MERSENNE_61)) for _ in range(h)]

    def __len__(self):
        return len(self.params)

    def signature(self, members) -> tuple:
        """Min-hash of ``members`` under each function, in order."""
        if not members:
            raise ValueError("cannot sign an empty vertex set")
        p = MERSENNE_61
        xs = [mix64(v) for v in members]
        return tuple(min((a * x + b) % p for x in xs) for a, b in self.params)


def compute_shingles(sg, family: HashFamily) -> tuple:
    return family.signature(sg.members)


def jaccard_estimate(sig_a, sig_b) -> float:
    """Fraction of agreeing min-hashes, an unbiased estimate of Jaccard similarity."""
    return sum(x == y for x, y in zip(sig_a, sig_b)) / len(sig_a)


def order_firstfit(subgraphs) -> list:
    return list(range(len(subgraphs)))


def order_ffd(subgraphs) -> list:
    return sorted(range(len(subgraphs)), key=lambda i: -subgraphs[i].size)


def order_shingle(subgraphs, family: HashFamily, signatures=None) -> list:
    """Indices sorted lexicographically by signature; ties keep input order."""
    sigs = signatures or [family.signature(sg.members) for sg in subgraphs]
    return sorted(range(len(subgraphs)), key=sigs.__getitem__)
