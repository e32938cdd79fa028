"""Synchronization delay of aggregation paths and trees.

Under aggregate-forward, a parent forwards only after its slowest child has
arrived, so a tree's delay per unit of data is its heaviest leaf-to-root
path of transfer delays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .overlay import DelayView


class TreeError(ValueError):
    pass


@dataclass(frozen=True)
class AggTree:
    root: int
    parent: Mapping[int, int]

    def __post_init__(self) -> None:
        parent = dict(self.parent)
        if self.root in parent:
            raise TreeError(f"root {self.root} cannot have a parent")
        for start in parent:
            seen = {start}
            v = start
            while v != self.root:
                if v not in parent:
                    raise TreeError(f"node {start} does not reach root {self.root}")
                v = parent[v]
                if v in seen:
                    raise TreeError(f"cycle through node {v}")
                seen.add(v)
        object.__setattr__(self, "parent", parent)

    @property
    def nodes(self) -> list[int]:
        return sorted({self.root, *self.parent})

    def children(self) -> dict[int, list[int]]:
        kids: dict[int, list[int]] = {v: [] for v in self.nodes}
        for child, par in sorted(self.parent.items()):
            kids[par].append(child)
        return kids

    def edges(self) -> list[tuple[int, int]]:
        return sorted(self.parent.items())

    def leaves(self) -> list[int]:
        return [v for v, ks in self.children().items() if not ks and v != self.root]

    def path_to_root(self, v: int) -> list[int]:
        path = [v]
        while path[-1] != self.root:
            path.append(self.parent[path[-1]])
        return path

    def depth_order(self) -> list[int]:
        """Nodes ordered root first, children after parents."""
        kids = self.children()
        order, frontier = [], [self.root]
        while frontier:
            order.extend(frontier)
            frontier = [c for v in frontier for c in kids[v]]
        return order

    def spans(self, nodes: Sequence[int] | range) -> bool:
        return set(self.nodes) == set(nodes)


@dataclass(frozen=True)
class PathDelayBreakdown:
    transfer_total: float
    blockage_total: float
    processing_total: float = 0

    @property
    def total(self) -> float:
        return self.transfer_total + self.blockage_total + self.processing_total


def subtree_delays(t: AggTree, d: DelayView) -> dict[int, float]:
    """Delay of every subtree, one bottom-up max-plus pass."""
    kids = t.children()
    out: dict[int, float] = {}
    for v in reversed(t.depth_order()):
        best = 0
        for c in kids[v]:
            if (c, v) not in d:
                raise TreeError(f"tree edge {c}-{v} is not an overlay link")
            best = max(best, out[c] + d[c, v])
        out[v] = best
    return out


def tree_delay(t: AggTree, d: DelayView) -> float:
    return subtree_delays(t, d)[t.root]


def path_delay(p: Sequence[int], d: DelayView,
               blockage: Mapping[int, float] | None = None) -> PathDelayBreakdown:
    """Transfer and blockage delay of path ``p`` listed leaf first."""
    transfer = 0
    for u, v in zip(p, p[1:]):
        if (u, v) not in d:
            raise TreeError(f"hop {u}-{v} is not an overlay link")
        transfer += d[u, v]
    blocked = sum((blockage or {}).get(v, 0) for v in p[1:])
    return PathDelayBreakdown(transfer, blocked, 0)


def quality_score(t: AggTree, d: DelayView) -> float:
    delay = tree_delay(t, d)
    if not delay > 0:
        raise TreeError("quality score needs a positive tree delay")
    return 1 / delay
