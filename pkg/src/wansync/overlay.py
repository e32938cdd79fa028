"""Overlay network model: nodes, undirected links and time-varying rates.

Throughputs are in parameters per second and transfer delays in seconds per
parameter. A link's rate schedule is piecewise constant and left-closed: at a
segment's start time the new rate already applies.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Mapping


class GraphError(ValueError):
    """Invalid overlay description or query."""


Edge = tuple[int, int]


def edge_key(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class LinkSpec:
    a: int
    b: int
    schedule: tuple[tuple[float, float], ...]
    latency: float = 0.0
    loss_rate: float = 0.0

    def __post_init__(self) -> None:
        if self.a == self.b:
            raise GraphError(f"link {self.a}-{self.b}: endpoints must differ")
        if self.a > self.b:
            a, b = self.b, self.a
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)
        if not self.schedule:
            raise GraphError(f"link {self.a}-{self.b}: empty rate schedule")
        sched = tuple((float(t), r) for t, r in self.schedule)
        if sched[0][0] != 0.0:
            raise GraphError(f"link {self.a}-{self.b}: rate schedule must start at time 0")
        for (t0, _), (t1, _) in zip(sched, sched[1:]):
            if t1 <= t0:
                raise GraphError(f"link {self.a}-{self.b}: schedule times must strictly increase")
        for _, rate in sched:
            if not rate > 0:
                raise GraphError(f"link {self.a}-{self.b}: non-positive throughput {rate!r}")
        object.__setattr__(self, "schedule", sched)
        if self.latency < 0:
            raise GraphError(f"link {self.a}-{self.b}: negative latency")
        if not 0 <= self.loss_rate < 1:
            raise GraphError(f"link {self.a}-{self.b}: loss rate must be in [0, 1)")

    @property
    def key(self) -> Edge:
        return (self.a, self.b)

    def rate_at(self, t: float) -> float:
        starts = [s for s, _ in self.schedule]
        return self.schedule[bisect.bisect_right(starts, t) - 1][1]

    def change_times(self) -> list[float]:
        return [s for s, _ in self.schedule[1:]]


@dataclass(frozen=True)
class OverlayGraph:
    node_count: int
    links: tuple[LinkSpec, ...]
    names: tuple[str, ...] = ()
    _index: dict[Edge, LinkSpec] = field(init=False, repr=False, compare=False)
    _adj: dict[int, tuple[int, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.node_count < 1:
            raise GraphError("graph needs at least one node")
        if self.names and len(self.names) != self.node_count:
            raise GraphError("names must list every node exactly once")
        if len(set(self.names)) != len(self.names):
            raise GraphError("duplicate node name")
        index: dict[Edge, LinkSpec] = {}
        adj: dict[int, list[int]] = {v: [] for v in range(self.node_count)}
        for link in self.links:
            for end in (link.a, link.b):
                if not 0 <= end < self.node_count:
                    raise GraphError(f"link {link.a}-{link.b}: dangling node id {end}")
            if link.key in index:
                raise GraphError(f"duplicate link {link.a}-{link.b}")
            index[link.key] = link
            adj[link.a].append(link.b)
            adj[link.b].append(link.a)
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_adj", {v: tuple(sorted(ns)) for v, ns in adj.items()})

    @property
    def nodes(self) -> range:
        return range(self.node_count)

    def edges(self) -> list[Edge]:
        return sorted(self._index)

    def link(self, u: int, v: int) -> LinkSpec:
        try:
            return self._index[edge_key(u, v)]
        except KeyError:
            raise GraphError(f"unknown link {u}-{v}") from None

    def has_link(self, u: int, v: int) -> bool:
        return edge_key(u, v) in self._index

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    def name(self, v: int) -> str:
        return self.names[v] if self.names else str(v)

    def components(self) -> list[list[int]]:
        seen: set[int] = set()
        out = []
        for start in self.nodes:
            if start in seen:
                continue
            comp, stack = [], [start]
            seen.add(start)
            while stack:
                u = stack.pop()
                comp.append(u)
                for w in self._adj[u]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            out.append(sorted(comp))
        return out

    def is_connected(self) -> bool:
        return len(self.components()) == 1

    def change_times(self) -> list[float]:
        return sorted({t for link in self.links for t in link.change_times()})


class DelayView(Mapping[Edge, float]):
    """Per-link transfer delay snapshot, keyed by the sorted endpoint pair.

    Lookups accept either orientation: ``view[u, v] == view[v, u]``.
    """

    def __init__(self, delays: Mapping[Edge, float], time: float = 0.0):
        table: dict[Edge, float] = {}
        for (u, v), w in delays.items():
            if not w > 0:
                raise GraphError(f"link {u}-{v}: transfer delay must be positive")
            table[edge_key(u, v)] = w
        self._delays = table
        self.time = time

    def __getitem__(self, key: Edge) -> float:
        return self._delays[edge_key(*key)]

    def __contains__(self, key: object) -> bool:
        return isinstance(key, tuple) and len(key) == 2 and edge_key(*key) in self._delays

    def __iter__(self) -> Iterator[Edge]:
        return iter(self._delays)

    def __len__(self) -> int:
        return len(self._delays)

    def adjacency(self) -> dict[int, list[tuple[int, float]]]:
        adj: dict[int, list[tuple[int, float]]] = {}
        for (u, v), w in self._delays.items():
            adj.setdefault(u, []).append((v, w))
            adj.setdefault(v, []).append((u, w))
        for ns in adj.values():
            ns.sort()
        return adj

    def scaled(self, factor: float) -> "DelayView":
        return DelayView({e: w * factor for e, w in self._delays.items()}, self.time)

    def __repr__(self) -> str:
        return f"DelayView({self._delays!r}, time={self.time})"


def throughput_at(g: OverlayGraph, e: Edge, t: float) -> float:
    return g.link(*e).rate_at(t)


def delay_view(g: OverlayGraph, t: float) -> DelayView:
    if t < 0:
        raise GraphError("query time must be non-negative")
    return DelayView({link.key: 1 / link.rate_at(t) for link in g.links}, t)


def delays_from_rates(rates: Mapping[Edge, float], time: float = 0.0) -> DelayView:
    return DelayView({e: 1 / r for e, r in rates.items()}, time)


def build_graph(spec: Mapping[str, Any]) -> OverlayGraph:
    """Validate a structured description into an :class:`OverlayGraph`.

    ``spec`` has ``nodes`` (a count or a list of names) and ``links``, each
    link a mapping with ``ends`` plus either ``rate``, ``delay`` or
    ``schedule`` (list of ``[start, rate]``), and optional ``latency`` and
    ``loss``.
    """
    nodes = spec.get("nodes")
    if isinstance(nodes, int) and not isinstance(nodes, bool):
        names: tuple[str, ...] = ()
        count = nodes
    elif isinstance(nodes, list) and nodes:
        names = tuple(str(n) for n in nodes)
        count = len(names)
    else:
        raise GraphError("'nodes' must be a positive count or a list of names")
    lookup = {n: i for i, n in enumerate(names)}

    def resolve(ref: Any, where: str) -> int:
        if isinstance(ref, bool):
            raise GraphError(f"{where}: bad node reference {ref!r}")
        if isinstance(ref, int):
            if not 0 <= ref < count:
                raise GraphError(f"{where}: dangling node id {ref}")
            return ref
        if str(ref) in lookup:
            return lookup[str(ref)]
        raise GraphError(f"{where}: dangling node {ref!r}")

    links = []
    for i, raw in enumerate(spec.get("links") or []):
        where = f"links[{i}]"
        if not isinstance(raw, Mapping):
            raise GraphError(f"{where}: expected a mapping")
        unknown = set(raw) - {"ends", "rate", "delay", "schedule", "latency", "loss"}
        if unknown:
            raise GraphError(f"{where}: unknown key(s) {sorted(unknown)}")
        ends = raw.get("ends")
        if not isinstance(ends, list) or len(ends) != 2:
            raise GraphError(f"{where}: 'ends' must be a two-element list")
        given = [k for k in ("rate", "delay", "schedule") if k in raw]
        if len(given) != 1:
            raise GraphError(f"{where}: give exactly one of rate, delay, schedule")
        schedule = _schedule(raw, where)
        a, b = resolve(ends[0], where), resolve(ends[1], where)
        try:
            links.append(LinkSpec(a, b, schedule, float(raw.get("latency", 0.0)),
                                  float(raw.get("loss", 0.0))))
        except GraphError as exc:
            raise GraphError(f"{where}: {exc}") from None
    try:
        return OverlayGraph(count, tuple(links), names)
    except GraphError as exc:
        raise GraphError(str(exc)) from None


def _schedule(raw: Mapping[str, Any], where: str) -> tuple[tuple[float, float], ...]:
    def num(x: Any) -> float:
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise GraphError(f"{where}: expected a number, got {x!r}")
        return x

    if "rate" in raw:
        rate = num(raw["rate"])
        if rate <= 0:
            raise GraphError(f"{where}: non-positive throughput {rate!r}")
        return ((0.0, rate),)
    if "delay" in raw:
        delay = num(raw["delay"])
        if delay <= 0:
            raise GraphError(f"{where}: non-positive throughput (delay {delay!r})")
        return ((0.0, 1 / delay),)
    sched = raw["schedule"]
    if not isinstance(sched, list) or not sched:
        raise GraphError(f"{where}: schedule must be a non-empty list of [start, rate]")
    out = []
    for entry in sched:
        if not isinstance(entry, list) or len(entry) != 2:
            raise GraphError(f"{where}: schedule entries are [start, rate] pairs")
        start, rate = num(entry[0]), num(entry[1])
        if rate <= 0:
            raise GraphError(f"{where}: non-positive throughput {rate!r}")
        out.append((float(start), rate))
    return tuple(out)


def graph_to_spec(g: OverlayGraph) -> dict[str, Any]:
    """Inverse of :func:`build_graph` (always emits explicit schedules)."""
    links = []
    for link in g.links:
        entry: dict[str, Any] = {"ends": [link.a, link.b],
                                 "schedule": [[t, r] for t, r in link.schedule]}
        if link.latency:
            entry["latency"] = link.latency
        if link.loss_rate:
            entry["loss"] = link.loss_rate
        links.append(entry)
    return {"nodes": list(g.names) if g.names else g.node_count, "links": links}


def graph_from_weights(n: int, weights: Iterable[tuple[int, int, float]]) -> OverlayGraph:
    """Static graph whose link ``(u, v, w)`` has transfer delay ``w``."""
    return OverlayGraph(n, tuple(LinkSpec(u, v, ((0.0, 1 / w),)) for u, v, w in weights))
