"""Edge-disjoint alternative routes between every ordered node pair.

For each pair the fastest path is taken first; its links are then excluded
and the search repeats on what is left until the pair is disconnected. The
first path of a pair is its primary path, the rest are auxiliary paths in
order of increasing delay.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .overlay import DelayView, OverlayGraph, edge_key
from .planner import Path, shortest_paths_from


class RouteError(ValueError):
    pass


def path_edges(p: Sequence[int]) -> list[tuple[int, int]]:
    return [edge_key(u, v) for u, v in zip(p, p[1:])]


def path_cost(p: Sequence[int], d: DelayView) -> float:
    total = 0
    for u, v in zip(p, p[1:]):
        if (u, v) not in d:
            raise RouteError(f"hop {u}-{v} is not an overlay link")
        total += d[u, v]
    return total


def rank_paths(paths: Iterable[Sequence[int]], d: DelayView) -> list[Path]:
    """Stable sort by total transfer delay, fewer hops first on ties."""
    keyed = [(path_cost(p, d), len(p), tuple(p)) for p in paths]
    return [p for _, _, p in sorted(keyed, key=lambda x: x[:2])]


@dataclass(frozen=True)
class AuxRouteTable:
    routes: Mapping[tuple[int, int], tuple[Path, ...]]

    def __getitem__(self, pair: tuple[int, int]) -> tuple[Path, ...]:
        return self.routes.get(pair, ())

    def primary(self, i: int, j: int) -> Path:
        paths = self[i, j]
        return paths[0] if paths else ()

    def auxiliary(self, i: int, j: int) -> tuple[Path, ...]:
        return self[i, j][1:]

    def to_dict(self) -> dict[str, list[list[int]]]:
        return {f"{i}->{j}": [list(p) for p in ps] for (i, j), ps in sorted(self.routes.items())}


def _disjoint_paths(source: int, target: int, d: DelayView,
                    limit: int | None) -> list[Path]:
    residual = {e: d[e] for e in d}
    found: list[Path] = []
    while limit is None or len(found) < limit:
        adj: dict[int, list[tuple[int, float]]] = {}
        for (u, v), w in residual.items():
            adj.setdefault(u, []).append((v, w))
            adj.setdefault(v, []).append((u, w))
        for ns in adj.values():
            ns.sort()
        _, paths = shortest_paths_from(source, adj)
        p = paths.get(target)
        if p is None:
            break
        found.append(p)
        for e in path_edges(p):
            del residual[e]
    return found


def search_aux_paths(g: OverlayGraph, d: DelayView,
                     max_paths: int | None = None) -> AuxRouteTable:
    routes: dict[tuple[int, int], tuple[Path, ...]] = {}
    for i in g.nodes:
        for j in g.nodes:
            if i == j:
                continue
            found = _disjoint_paths(i, j, d, max_paths)
            if found:
                routes[i, j] = tuple(rank_paths(found, d))
    return AuxRouteTable(routes)
