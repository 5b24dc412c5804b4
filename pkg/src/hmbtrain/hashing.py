"""Random equal-occupancy bucket hashing of the codeword universe.

A hash round is realized as a uniformly random permutation of the universe
{0, ..., N_C - 1} cut into B contiguous blocks, so every bucket holds exactly
R = N_C / B members (plain modular hashing cannot guarantee that).  Draws are
counter-style deterministic: the same (seed, round) always produces the same
table, and derived per-BS seeds keep all K * L tables independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "HashFamily",
    "BucketTable",
    "derive_seed",
    "draw_hash",
    "table_from_permutation",
    "collision_rate",
]


@dataclass(frozen=True)
class HashFamily:
    """Family of equal-partition hash functions over a fixed universe."""

    universe_size: int
    bucket_count: int
    seed: int

    def __post_init__(self):
        if self.bucket_count < 1:
            raise ValueError("bucket_count must be >= 1")
        if self.universe_size % self.bucket_count != 0:
            raise ValueError(
                f"bucket_count {self.bucket_count} must divide universe size "
                f"{self.universe_size}"
            )

    @property
    def bucket_size(self) -> int:
        return self.universe_size // self.bucket_count


@dataclass(frozen=True)
class BucketTable:
    """One hash round: B disjoint buckets of R sorted member indices."""

    buckets: np.ndarray = field(repr=False)
    round_id: int = 0

    @property
    def bucket_count(self) -> int:
        return self.buckets.shape[0]

    @property
    def bucket_size(self) -> int:
        return self.buckets.shape[1]

    @property
    def universe_size(self) -> int:
        return self.buckets.size

    def bucket_of(self, x: int) -> int:
        rows = np.flatnonzero((self.buckets == x).any(axis=1))
        if rows.size != 1:
            raise ValueError(f"index {x} outside the table universe")
        return int(rows[0])

    def to_text(self) -> str:
        lines = [f"round {self.round_id}"]
        lines += [" ".join(str(int(x)) for x in row) for row in self.buckets]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BucketTable":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        head = lines[0].split()
        if head[0] != "round":
            raise ValueError("bucket table text must start with a round header")
        rows = np.array([[int(x) for x in ln.split()] for ln in lines[1:]])
        return cls(buckets=rows, round_id=int(head[1]))


def derive_seed(global_seed: int, *keys: int) -> int:
    """Mix a global seed with stream keys into an independent 64-bit seed."""
    ss = np.random.SeedSequence((global_seed, *keys))
    return int(ss.generate_state(1, np.uint64)[0])


def table_from_permutation(perm: np.ndarray, bucket_count: int,
                           round_id: int = 0) -> BucketTable:
    """Partition by a given permutation: bucket b = {x : perm[x] // R == b}.

    This is the deterministic core of draw_hash and doubles as a test hook.
    """
    perm = np.asarray(perm, dtype=int)
    n = perm.size
    if bucket_count < 1 or n % bucket_count != 0:
        raise ValueError("bucket_count must divide the universe size")
    order = np.argsort(perm)
    rows = np.sort(order.reshape(bucket_count, n // bucket_count), axis=1)
    return BucketTable(buckets=rows, round_id=round_id)


def draw_permutation(seed: int, round: int, universe_size: int) -> np.ndarray:
    """The raw uniform permutation behind draw_hash for (seed, round)."""
    rng = np.random.default_rng(np.random.SeedSequence((seed, round)))
    return rng.permutation(universe_size)


def draw_hash(family: HashFamily, round: int) -> BucketTable:
    """Draw the hash table for one round; reproducible from (seed, round)."""
    perm = draw_permutation(family.seed, round, family.universe_size)
    return table_from_permutation(perm, family.bucket_count, round_id=round)


def collision_rate(family: HashFamily, x1: int, x2: int, trials: int) -> float:
    """Empirical fraction of rounds in which x1 and x2 share a bucket.

    For equal-occupancy partitions the exact probability is
    (R - 1) / (N_C - 1), approximately 1/B for large universes.
    """
    if x1 == x2:
        raise ValueError("collision rate needs two distinct indices")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    r = family.bucket_size
    hits = 0
    for t in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence((family.seed, t)))
        perm = rng.permutation(family.universe_size)
        if perm[x1] // r == perm[x2] // r:
            hits += 1
    return hits / trials
