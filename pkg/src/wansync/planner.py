"""Root selection, fastest aggregation paths and multi-root tree plans.

Also builds the network-oblivious or weight-greedy baseline trees (star,
balanced k-way tree, minimum spanning tree) used in comparisons.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import networkx as nx

from .metric import AggTree, quality_score, tree_delay
from .overlay import DelayView, OverlayGraph


class PlanningError(RuntimeError):
    pass


Path = tuple[int, ...]


def shortest_paths_from(source: int, adj: Mapping[int, Sequence[tuple[int, float]]]
                        ) -> tuple[dict[int, float], dict[int, Path]]:
    """Dijkstra from ``source`` with a total tie-break.

    Equal-delay paths are ordered by hop count, then by the node sequence
    itself, so the union of returned paths is always a tree.
    """
    dist: dict[int, float] = {}
    paths: dict[int, Path] = {}
    heap: list[tuple[float, int, Path]] = [(0, 0, (source,))]
    while heap:
        dv, hops, path = heapq.heappop(heap)
        v = path[-1]
        if v in dist:
            continue
        dist[v] = dv
        paths[v] = path
        for w, weight in adj.get(v, ()):
            if w not in dist:
                heapq.heappush(heap, (dv + weight, hops + 1, path + (w,)))
    return dist, paths


@dataclass(frozen=True)
class FastestPathSet:
    paths: Mapping[tuple[int, int], Path]
    dist: Mapping[tuple[int, int], float] = field(default_factory=dict)

    def __getitem__(self, pair: tuple[int, int]) -> Path:
        return self.paths.get(pair, ())


def all_pairs(g: OverlayGraph, d: DelayView) -> FastestPathSet:
    adj = d.adjacency()
    paths: dict[tuple[int, int], Path] = {}
    dist: dict[tuple[int, int], float] = {}
    for i in g.nodes:
        di, pi = shortest_paths_from(i, adj)
        for j in g.nodes:
            if j != i:
                paths[i, j] = pi.get(j, ())
                if j in di:
                    dist[i, j] = di[j]
    return FastestPathSet(paths, dist)


def spt_delay(g: OverlayGraph, paths: FastestPathSet, v: int) -> float | None:
    """Delay of the shortest-path tree at ``v``; ``None`` if it cannot span."""
    worst = 0
    for j in g.nodes:
        if j == v:
            continue
        if (v, j) not in paths.dist:
            return None
        worst = max(worst, paths.dist[v, j])
    return worst


def find_fastest_paths(g: OverlayGraph, d: DelayView, roots: Sequence[int] = (),
                       n: int = 1) -> tuple[tuple[int, ...], FastestPathSet]:
    if not 1 <= n <= g.node_count:
        raise PlanningError(f"number of roots must be in [1, {g.node_count}], got {n}")
    paths = all_pairs(g, d)
    if roots:
        return tuple(roots), paths
    ranked = []
    for v in g.nodes:
        delay = spt_delay(g, paths, v)
        if delay is not None:
            ranked.append((delay, v))
    ranked.sort()
    if len(ranked) < n:
        raise PlanningError(
            f"only {len(ranked)} node(s) can reach every other node; cannot pick {n} roots")
    return tuple(v for _, v in ranked[:n]), paths


@dataclass(frozen=True)
class SyncPlan:
    epoch: int
    roots: tuple[int, ...]
    trees: Mapping[int, AggTree]
    scores: Mapping[int, float]
    shares: Mapping[int, float]
    kind: str = "FAPT"

    def delays(self, d: DelayView) -> dict[int, float]:
        return {r: tree_delay(self.trees[r], d) for r in self.roots}

    def cost(self, d: DelayView) -> float:
        return max(self.delays(d).values())

    def to_dict(self, d: DelayView | None = None) -> dict[str, Any]:
        out: dict[str, Any] = {
            "kind": self.kind,
            "epoch": self.epoch,
            "roots": list(self.roots),
            "trees": {str(r): {str(c): p for c, p in sorted(self.trees[r].parent.items())}
                      for r in self.roots},
            "scores": {str(r): self.scores[r] for r in self.roots},
            "shares": {str(r): self.shares[r] for r in self.roots},
        }
        if d is not None:
            out["delays"] = {str(r): w for r, w in self.delays(d).items()}
        return out


def allocate_shares(scores: Mapping[int, float]) -> dict[int, float]:
    if not scores:
        raise PlanningError("cannot allocate shares over an empty root set")
    for r, q in scores.items():
        if not q > 0:
            raise PlanningError(f"root {r} has non-positive score {q!r}")
    total = sum(scores.values())
    return {r: q / total for r, q in scores.items()}


def _tree_from_paths(root: int, g: OverlayGraph, paths: FastestPathSet) -> AggTree:
    parent = {}
    for j in g.nodes:
        if j == root:
            continue
        p = paths[root, j]
        if not p:
            raise PlanningError(f"node {j} is unreachable from root {root}")
        for a, b in zip(p, p[1:]):
            # path runs root -> j, so each node's parent is its predecessor
            parent.setdefault(b, a)
    return AggTree(root, parent)


def _score(tree: AggTree, d: DelayView) -> float:
    return quality_score(tree, d) if tree.parent else 1.0


def build_plan(g: OverlayGraph, d: DelayView, roots: Sequence[int] = (), n: int = 1,
               prev_epoch: int = 0) -> SyncPlan:
    if not g.is_connected():
        raise PlanningError(f"overlay is disconnected: components {g.components()}")
    chosen, paths = find_fastest_paths(g, d, roots, n)
    trees = {r: _tree_from_paths(r, g, paths) for r in chosen}
    scores = {r: _score(t, d) for r, t in trees.items()}
    return SyncPlan(prev_epoch + 1, chosen, trees, scores, allocate_shares(scores))


def single_root_plan(tree: AggTree, d: DelayView, kind: str = "CUSTOM",
                     epoch: int = 1) -> SyncPlan:
    return SyncPlan(epoch, (tree.root,), {tree.root: tree}, {tree.root: _score(tree, d)},
                    {tree.root: 1.0}, kind)


def star_tree(g: OverlayGraph, root: int) -> AggTree:
    return AggTree(root, {v: root for v in g.nodes if v != root})


def bkt_tree(g: OverlayGraph, root: int, k: int) -> AggTree:
    if k < 2:
        raise PlanningError("balanced k-way tree needs k >= 2")
    order = [root] + [v for v in g.nodes if v != root]
    return AggTree(root, {order[i]: order[(i - 1) // k] for i in range(1, len(order))})


def mst_tree(g: OverlayGraph, d: DelayView, root: int) -> AggTree:
    nxg = nx.Graph()
    nxg.add_nodes_from(g.nodes)
    for u, v in sorted(d):
        nxg.add_edge(u, v, weight=d[u, v])
    if not nx.is_connected(nxg):
        raise PlanningError("minimum spanning tree needs a connected overlay")
    mst = nx.minimum_spanning_tree(nxg, weight="weight", algorithm="kruskal")
    preds = dict(nx.bfs_predecessors(mst, root, sort_neighbors=sorted))
    return AggTree(root, preds)


def build_baseline(g: OverlayGraph, d: DelayView, kind: str, root: int, k: int = 2,
                   epoch: int = 1) -> SyncPlan:
    if not 0 <= root < g.node_count:
        raise PlanningError(f"unknown root {root}")
    kind = kind.upper()
    if kind == "STAR":
        tree = star_tree(g, root)
    elif kind == "BKT":
        tree = bkt_tree(g, root, k)
    elif kind == "MST":
        tree = mst_tree(g, d, root)
    else:
        raise PlanningError(f"unknown baseline {kind!r}")
    missing = [(c, p) for c, p in tree.edges() if not g.has_link(c, p)]
    if missing:
        c, p = missing[0]
        raise PlanningError(f"{kind} rooted at {root} needs overlay link {c}-{p}, which is absent")
    return single_root_plan(tree, d, kind, epoch)
