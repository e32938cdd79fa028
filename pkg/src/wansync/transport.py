"""Chunking, chunk-to-root apportionment and the per-sender path scheduler."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence


@dataclass(frozen=True)
class TensorSpec:
    tensor_id: str
    size: int

    def __post_init__(self) -> None:
        if self.size < 1:
            raise ValueError(f"tensor {self.tensor_id!r}: size must be >= 1")


@dataclass(frozen=True, order=True)
class Chunk:
    tensor_index: int
    chunk_index: int
    size: int
    owner_root: int = -1
    tensor_id: str = field(default="", compare=False)

    @property
    def key(self) -> tuple[int, int]:
        return (self.tensor_index, self.chunk_index)


def split_tensor(t: TensorSpec, chunk_size: int) -> list[int]:
    if chunk_size < 1:
        raise ValueError("chunk size must be >= 1")
    full, rest = divmod(t.size, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def chunk_model(tensors: Sequence[TensorSpec], chunk_size: int) -> list[Chunk]:
    return [Chunk(ti, ci, size, tensor_id=t.tensor_id)
            for ti, t in enumerate(tensors)
            for ci, size in enumerate(split_tensor(t, chunk_size))]


def apportion(total: int, shares: Mapping[int, float]) -> dict[int, int]:
    """Largest-remainder apportionment; ties go to the lowest root id."""
    if not shares:
        raise ValueError("cannot apportion over an empty share map")
    quotas = {r: s * total for r, s in shares.items()}
    counts = {r: math.floor(q) for r, q in quotas.items()}
    left = total - sum(counts.values())
    by_remainder = sorted(shares, key=lambda r: (-(quotas[r] - counts[r]), r))
    for r in by_remainder[:left]:
        counts[r] += 1
    return counts


def assign_roots(chunks: Sequence[Chunk], shares: Mapping[int, float]) -> list[Chunk]:
    """Give each chunk an owner root, honouring the apportioned counts.

    Chunks are dealt in order to whichever root is furthest behind its
    target pace, which interleaves roots instead of handing out blocks.
    """
    counts = apportion(len(chunks), shares)
    roots = sorted(counts)
    given = {r: 0 for r in roots}
    total = len(chunks)
    out = []
    for i, chunk in enumerate(chunks):
        pace = (i + 1) / total
        open_roots = [r for r in roots if given[r] < counts[r]]
        r = max(open_roots, key=lambda r: (counts[r] * pace - given[r], -r))
        given[r] += 1
        out.append(Chunk(chunk.tensor_index, chunk.chunk_index, chunk.size, r, chunk.tensor_id))
    return out


PRIMARY = -1


@dataclass
class PathQueue:
    path: tuple[int, ...]
    pending: deque = field(default_factory=deque)
    occupancy: int = 0
    sending: Hashable | None = None


@dataclass
class SendQueues:
    """One sender's queues toward a single next-hop destination."""

    primary: PathQueue
    aux: list[PathQueue] = field(default_factory=list)

    def queue(self, choice: int) -> PathQueue:
        return self.primary if choice == PRIMARY else self.aux[choice]


def primary_busy(occupancy: int, bound: int, mode: str = "inclusive") -> bool:
    return occupancy >= bound if mode == "inclusive" else occupancy > bound


def pick_path(primary_occupancy: int, aux_occupancy: Sequence[int], busy_bound: int,
              aux_capacity: int, mode: str = "inclusive") -> int:
    """Return ``PRIMARY`` or the index of the auxiliary queue to use."""
    if not primary_busy(primary_occupancy, busy_bound, mode):
        return PRIMARY
    for i, occ in enumerate(aux_occupancy):
        if occ < aux_capacity:
            return i
    return PRIMARY


def pick_queue(q: SendQueues, busy_bound: int, aux_capacity: int,
               mode: str = "inclusive") -> int:
    return pick_path(q.primary.occupancy, [a.occupancy for a in q.aux],
                     busy_bound, aux_capacity, mode)
