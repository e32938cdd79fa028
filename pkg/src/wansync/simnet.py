"""Deterministic discrete-event simulation of parameter synchronization.

Model summary:

* Each directed link is a processor-sharing server: concurrent transfers
  split its current capacity equally. Capacity follows the link's rate
  schedule, scaled by ``1 - loss_rate`` (loss costs retransmissions, not
  data). A transfer is delivered ``latency`` seconds after its last byte
  leaves.
* A sender keeps one queue per path toward each next hop; a queue sends one
  chunk at a time. New chunks pick a queue with the primary/auxiliary policy
  of :func:`wansync.transport.pick_path`. Occupancy drops when the chunk
  reaches the end of its path.
* Tree nodes aggregate-forward: a chunk leaves a node once all of the node's
  children (in that epoch's tree) have delivered it. Relays on auxiliary
  paths forward immediately without aggregating.
* The scheduler refreshes policy every ``UPDATE_TIME`` seconds when
  awareness is on, from link estimates reported by the nodes.
* Before every push a node runs the TRP exchange; the scheduler pins one
  epoch per iteration.
"""

from __future__ import annotations

import heapq
import itertools
import random
import statistics
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Protocol, Sequence

from .auxroute import AuxRouteTable, search_aux_paths
from .awareness import (ClockModel, LinkStateStore, ProbeSample, ProbeWindow, correct_clock,
                        ntp_offset, report)
from .config import Hyperparams
from .consistency import (Action, MessageMeta, NodeProtocol, PolicyBundle, PolicyServer,
                          ProtocolViolation)
from .overlay import Edge, OverlayGraph, delays_from_rates, edge_key
from .planner import SyncPlan, build_baseline, build_plan
from .scenario import Scenario
from .transport import PRIMARY, PathQueue, SendQueues, assign_roots, chunk_model, pick_queue


class SimulationError(RuntimeError):
    pass


class DeadlockError(SimulationError):
    def __init__(self, message: str, diagnostic: dict[str, Any]):
        super().__init__(message)
        self.diagnostic = diagnostic


def fair_share(capacity: float, active_flows: int) -> list[float]:
    if capacity <= 0:
        raise ValueError("capacity must be positive")
    return [capacity / active_flows] * active_flows


@dataclass
class IterationMetrics:
    iteration: int
    start: float
    end: float
    epoch: int
    chunks: int
    aux_chunks: int = 0
    cached_chunks: int = 0
    link_load: dict[tuple[int, int], float] = field(default_factory=dict)
    estimate_error: float | None = None
    emitted: int = 0
    aggregated: int = 0

    @property
    def sync_completion(self) -> float:
        return self.end - self.start

    def utilization(self, capacity: dict[tuple[int, int], float]) -> float:
        if not self.link_load or self.sync_completion <= 0:
            return 0.0
        return statistics.fmean(load / (capacity[e] * self.sync_completion)
                                for e, load in self.link_load.items())


# --- policy sources -------------------------------------------------------

def bootstrap_rates(g: OverlayGraph, hyper: Hyperparams) -> dict[Edge, float]:
    if hyper.default_rate is not None:
        return {e: hyper.default_rate for e in g.edges()}
    return {link.key: link.rate_at(0.0) for link in g.links}


def make_bundle(g: OverlayGraph, rates: dict[Edge, float], epoch: int, roots: Sequence[int],
                n: int, aux: bool, max_aux_paths: int | None = None) -> PolicyBundle:
    d = delays_from_rates(rates)
    plan = build_plan(g, d, roots, n, epoch - 1)
    table = search_aux_paths(g, d, max_aux_paths) if aux else AuxRouteTable({})
    return PolicyBundle(epoch, plan, table)


class PolicySource(Protocol):
    adaptive: bool
    allows_aux: bool

    def initial(self) -> PolicyBundle: ...

    def refresh(self, now: float, store: LinkStateStore) -> PolicyBundle | None: ...


class StaticPolicy:
    adaptive = False

    def __init__(self, bundle: PolicyBundle, allows_aux: bool = False):
        self.bundle = bundle
        self.allows_aux = allows_aux

    @classmethod
    def from_plan(cls, plan: SyncPlan, aux_table: AuxRouteTable | None = None) -> "StaticPolicy":
        table = aux_table or AuxRouteTable({})
        return cls(PolicyBundle(plan.epoch, plan, table), allows_aux=aux_table is not None)

    def initial(self) -> PolicyBundle:
        return self.bundle

    def refresh(self, now: float, store: LinkStateStore) -> PolicyBundle | None:
        return None


class ScriptedPolicy:
    """Publishes a fixed sequence of bundles, one per refresh tick."""

    adaptive = True

    def __init__(self, bundles: Sequence[PolicyBundle], allows_aux: bool = True):
        self.bundles = list(bundles)
        self.allows_aux = allows_aux
        self._next = 1

    def initial(self) -> PolicyBundle:
        return self.bundles[0]

    def refresh(self, now: float, store: LinkStateStore) -> PolicyBundle | None:
        if self._next >= len(self.bundles):
            return None
        b = self.bundles[self._next]
        self._next += 1
        return b


class AdaptivePolicy:
    """Multi-root fastest-path trees, replanned from reported estimates."""

    allows_aux = True

    def __init__(self, g: OverlayGraph, hyper: Hyperparams):
        self.g = g
        self.hyper = hyper
        self.n = min(hyper.num_root_servers, g.node_count)
        self.fallback = bootstrap_rates(g, hyper)
        self.adaptive = hyper.enable_awareness
        self.epoch = 0
        self.roots: tuple[int, ...] = ()

    def _bundle(self, rates: dict[Edge, float]) -> PolicyBundle:
        self.epoch += 1
        b = make_bundle(self.g, rates, self.epoch, self.roots, self.n,
                        self.hyper.enable_aux_path, self.hyper.max_aux_paths)
        self.roots = b.plan.roots
        return b

    def initial(self) -> PolicyBundle:
        return self._bundle(self.fallback)

    def refresh(self, now: float, store: LinkStateStore) -> PolicyBundle | None:
        rates = store.planning_rates(self.g, lambda e: self.fallback[e])
        return self._bundle(rates)


def make_policy(scenario: Scenario, topology: str, hyper: Hyperparams | None = None
                ) -> PolicySource:
    hyper = hyper or scenario.hyper
    g = scenario.graph
    kind = topology.upper()
    if kind == "FAPT":
        return AdaptivePolicy(g, hyper)
    k = hyper.bkt_k
    if kind.startswith("BKT") and ":" in kind:
        kind, k_text = kind.split(":", 1)
        k = int(k_text)
    # static baselines get the declared t=0 rates even when FAPT cold-starts
    d = delays_from_rates({link.key: link.rate_at(0.0) for link in g.links})
    plan = build_baseline(g, d, kind, hyper.baseline_root, k)
    return StaticPolicy.from_plan(plan)


# --- simulator internals --------------------------------------------------

@dataclass
class Packet:
    meta: MessageMeta
    weight: int
    queue: PathQueue
    hop: int = 0


@dataclass
class _Buffer:
    arrivals: int = 0
    weight: int = 0
    fired: bool = False


class _DirLink:
    __slots__ = ("u", "v", "spec", "capacity", "flows", "last", "version")

    def __init__(self, u: int, v: int, spec, capacity: float):
        self.u, self.v, self.spec = u, v, spec
        self.capacity = capacity
        self.flows: dict[int, list] = {}
        self.last = 0.0
        self.version = 0


LIVE = {"iter_start", "trp_req", "trp_resp", "deliver", "agg_done", "report", "bundle"}


class Simulation:
    def __init__(self, scenario: Scenario, policy: PolicySource | str = "FAPT", *,
                 hyper: Hyperparams | None = None, seed: int = 0, protocol: str = "trp",
                 control_delay_fn: Callable[[str, int], float] | None = None,
                 trace: bool = False, iteration_start_skew: Callable[[int, int], float] | None = None):
        self.scenario = scenario
        self.hyper = hyper or scenario.hyper
        self.g = scenario.graph
        self.n = self.g.node_count
        self.policy = make_policy(scenario, policy, self.hyper) if isinstance(policy, str) else policy
        if protocol not in ("trp", "naive"):
            raise ValueError("protocol must be 'trp' or 'naive'")
        self.protocol = protocol
        self.rng = random.Random(seed)
        self.control_delay_fn = control_delay_fn
        self.start_skew = iteration_start_skew
        self.aux_enabled = self.hyper.enable_aux_path and self.policy.allows_aux
        self.awareness = self.hyper.enable_awareness and self.policy.adaptive
        self.chunks = chunk_model(scenario.tensors, self.hyper.chunk_size)
        self.trace: list[dict[str, Any]] | None = [] if trace else None

        self.now = 0.0
        self._heap: list = []
        self._seq = itertools.count()
        self._flow_ids = itertools.count()
        self.live_events = 0
        self.active_flows = 0

        self.links: dict[tuple[int, int], _DirLink] = {}
        for spec in self.g.links:
            for u, v in ((spec.a, spec.b), (spec.b, spec.a)):
                self.links[u, v] = _DirLink(u, v, spec, self._capacity(spec, 0.0))

        # clocks: true offsets injected, learned by one exchange with node 0
        if scenario.clock_offsets:
            true_offsets = list(scenario.clock_offsets)
        else:
            m = self.hyper.clock_offset_max
            true_offsets = [0.0] + [self.rng.uniform(-m, m) if m else 0.0
                                    for _ in range(self.n - 1)]
        self.true_offsets = true_offsets
        learned = {}
        for v in self.g.nodes:
            d = self.hyper.control_delay
            t1 = true_offsets[v]
            learned[v] = ntp_offset(t1, d, d, 2 * d + true_offsets[v])
        self.clock = ClockModel(learned, reference=0 if learned.get(0, 0.0) == 0.0 else None)

        self.server: PolicyServer | None = None
        self.store = LinkStateStore()
        self.protos = {v: NodeProtocol(v, strict_epochs=(protocol == "naive"))
                       for v in self.g.nodes}
        self.windows: dict[tuple[int, int], ProbeWindow] = {}
        self.queues: dict[tuple[int, int, int], SendQueues] = {}
        self.agg_free = {v: 0.0 for v in self.g.nodes}
        self.own_epoch: dict[int, dict[int, int]] = {v: {} for v in self.g.nodes}
        self._owner_cache: dict[int, dict[tuple[int, int], int]] = {}
        self._busy_cache: dict[int, set[Edge]] = {}
        self._kids_cache: dict[tuple[int, int], dict[int, list[int]]] = {}

        self.metrics: list[IterationMetrics] = []
        self.iteration = -1
        self.horizon = 0
        self.iter_start_time = 0.0
        self.done_chunks: dict[int, set[tuple[int, int]]] = {}
        self.lost = 0
        self.duplicates = 0
        self.weight_errors = 0
        self.cur: IterationMetrics | None = None
        self.finished = False

    # -- event queue --
    def _schedule(self, t: float, kind: str, *payload: Any) -> None:
        if t < self.now:
            raise SimulationError(f"event {kind} scheduled in the past ({t} < {self.now})")
        if kind in LIVE:
            self.live_events += 1
        heapq.heappush(self._heap, (t, next(self._seq), kind, payload))

    def _control_delay(self, kind: str, node: int) -> float:
        if self.control_delay_fn is not None:
            return self.hyper.control_delay + self.control_delay_fn(kind, node)
        return self.hyper.control_delay

    def _capacity(self, spec, t: float) -> float:
        return spec.rate_at(t) * (1 - spec.loss_rate)

    def _local(self, v: int) -> float:
        return self.now + self.true_offsets[v]

    def _stamp(self, v: int) -> float:
        return correct_clock(self._local(v), v, self.clock)

    # -- plan lookups --
    def _bundle(self, epoch: int) -> PolicyBundle:
        assert self.server is not None
        return self.server.bundles[epoch]

    def _owners(self, epoch: int) -> dict[tuple[int, int], int]:
        if epoch not in self._owner_cache:
            plan = self._bundle(epoch).plan
            self._owner_cache[epoch] = {c.key: c.owner_root
                                        for c in assign_roots(self.chunks, plan.shares)}
        return self._owner_cache[epoch]

    def _plan_links(self, epoch: int) -> set[Edge]:
        if epoch not in self._busy_cache:
            plan = self._bundle(epoch).plan
            self._busy_cache[epoch] = {edge_key(a, b) for tree in plan.trees.values()
                                       for a, b in tree.edges()}
        return self._busy_cache[epoch]

    def _kids(self, epoch: int, root: int) -> dict[int, list[int]]:
        key = (epoch, root)
        if key not in self._kids_cache:
            self._kids_cache[key] = self._bundle(epoch).plan.trees[root].children()
        return self._kids_cache[key]

    # -- links --
    def _advance(self, link: _DirLink) -> None:
        if link.flows:
            per = link.capacity / len(link.flows)
            dt = self.now - link.last
            for f in link.flows.values():
                f[0] -= per * dt
        link.last = self.now

    def _reschedule(self, link: _DirLink) -> None:
        link.version += 1
        if not link.flows:
            return
        per = link.capacity / len(link.flows)
        fid = min(link.flows, key=lambda i: (link.flows[i][0], i))
        t = self.now + max(link.flows[fid][0], 0.0) / per
        heapq.heappush(self._heap, (t, next(self._seq), "flow_done", ((link.u, link.v), link.version)))

    def _start_hop(self, pkt: Packet, u: int, v: int) -> None:
        link = self.links[u, v]
        self._advance(link)
        pkt.meta = pkt.meta.rehop(self._stamp(u))
        link.flows[next(self._flow_ids)] = [float(pkt.meta.size), pkt, self.now]
        self.active_flows += 1
        if self.cur is not None:
            self.cur.link_load[u, v] = self.cur.link_load.get((u, v), 0.0) + pkt.meta.size
        self._reschedule(link)

    def _on_flow_done(self, key: tuple[int, int], version: int) -> None:
        link = self.links[key]
        if version != link.version:
            return
        self._advance(link)
        eps = 1e-9
        finished = [i for i, f in link.flows.items() if f[0] <= eps * max(1.0, f[1].meta.size)]
        if not finished:
            finished = [min(link.flows, key=lambda i: (link.flows[i][0], i))]
        for fid in sorted(finished):
            _, pkt, _start = link.flows.pop(fid)
            self.active_flows -= 1
            if pkt.hop == 0:
                pkt.queue.sending = None
                self._try_start(pkt.queue)
            self._schedule(self.now + link.spec.latency, "deliver", link.u, link.v, pkt)
        self._reschedule(link)

    def _on_rate_change(self) -> None:
        for link in self.links.values():
            cap = self._capacity(link.spec, self.now)
            if cap != link.capacity:
                self._advance(link)
                link.capacity = cap
                self._reschedule(link)

    # -- sending --
    def _send_queues(self, u: int, dst: int, epoch: int) -> SendQueues:
        key = (u, dst, epoch)
        if key not in self.queues:
            aux = []
            if self.aux_enabled:
                busy = self._plan_links(epoch) if self.hyper.aux_links == "idle" else set()
                for p in self._bundle(epoch).aux_table[u, dst]:
                    if len(p) > 2 and p[0] == u and p[-1] == dst and \
                            busy.isdisjoint(edge_key(a, b) for a, b in zip(p, p[1:])):
                        aux.append(PathQueue(tuple(p)))
            self.queues[key] = SendQueues(PathQueue((u, dst)), aux)
        return self.queues[key]

    def _enqueue(self, u: int, dst: int, epoch: int, iteration: int, ckey: tuple[int, int],
                 size: int, weight: int) -> None:
        q = self._send_queues(u, dst, epoch)
        choice = pick_queue(q, self.hyper.primary_busy_bound, self.hyper.auxiliary_queue_length,
                            self.hyper.busy_mode)
        pq = q.queue(choice)
        is_aux = choice != PRIMARY
        meta = MessageMeta(epoch, is_aux, pq.path if is_aux else (), self._stamp(u), u,
                           ckey[0], ckey[1], size, iteration)
        pq.pending.append(Packet(meta, weight, pq))
        pq.occupancy += 1
        if is_aux and self.cur is not None:
            self.cur.aux_chunks += 1
        self._try_start(pq)

    def _try_start(self, pq: PathQueue) -> None:
        if pq.sending is None and pq.pending:
            pkt = pq.pending.popleft()
            pq.sending = pkt
            self._start_hop(pkt, pq.path[0], pq.path[1])

    # -- receiving --
    def _on_deliver(self, u: int, v: int, pkt: Packet) -> None:
        meta = pkt.meta
        if self.awareness:
            self._record_sample(u, v, meta)
        proto = self.protos[v]
        action, nxt = proto.on_receive(meta, pkt)
        if action is Action.FORWARD:
            pkt.hop += 1
            self._start_hop(pkt, v, nxt)
            return
        pkt.queue.occupancy -= 1
        if action is Action.CACHE:
            if self.cur is not None:
                self.cur.cached_chunks += 1
        elif action is Action.DROP:
            self.lost += 1
        else:
            self._contribute(v, pkt)

    def _record_sample(self, u: int, v: int, meta: MessageMeta) -> None:
        win = self.windows.get((u, v))
        if win is None:
            win = self.windows[u, v] = ProbeWindow(u, v, self.hyper.probe_chunk_size,
                                                   self.hyper.probe_chunk_num)
        est = win.add(ProbeSample(u, v, meta.send_ts, self._stamp(v), meta.size))
        if est is not None:
            self._schedule(self.now + self._control_delay("report", v), "report", report(v, [est]))

    def _contribute(self, v: int, pkt: Packet) -> None:
        meta = pkt.meta
        key = (meta.iteration, meta.epoch, meta.chunk_key)
        buf = self.protos[v].buffers.setdefault(key, _Buffer())
        buf.arrivals += 1
        buf.weight += pkt.weight
        self._check(v, meta.iteration, meta.epoch, meta.chunk_key)

    def _check(self, v: int, iteration: int, epoch: int, ckey: tuple[int, int]) -> None:
        if self.own_epoch[v].get(iteration) != epoch:
            return
        key = (iteration, epoch, ckey)
        buf = self.protos[v].buffers.setdefault(key, _Buffer())
        if buf.fired:
            return
        root = self._owners(epoch)[ckey]
        kids = self._kids(epoch, root)[v]
        if buf.arrivals < len(kids):
            return
        if buf.arrivals > len(kids):
            raise ProtocolViolation(f"node {v} got {buf.arrivals} contributions for {key}, "
                                    f"expected {len(kids)}")
        buf.fired = True
        weight = buf.weight + 1
        cost = self.hyper.aggregation_cost
        if kids and cost > 0:
            start = max(self.now, self.agg_free[v])
            self.agg_free[v] = start + cost
            self._schedule(start + cost, "agg_done", v, iteration, epoch, ckey, root, weight)
        else:
            self._forward(v, iteration, epoch, ckey, root, weight)

    def _forward(self, v: int, iteration: int, epoch: int, ckey: tuple[int, int], root: int,
                 weight: int) -> None:
        if v == root:
            self._root_complete(iteration, ckey, weight)
            return
        parent = self._bundle(epoch).plan.trees[root].parent[v]
        size = self.chunks_by_key[ckey].size
        self._enqueue(v, parent, epoch, iteration, ckey, size, weight)

    def _root_complete(self, iteration: int, ckey: tuple[int, int], weight: int) -> None:
        done = self.done_chunks.setdefault(iteration, set())
        if ckey in done:
            self.duplicates += 1
            return
        if weight != self.n:
            self.weight_errors += 1
        done.add(ckey)
        if self.cur is not None:
            self.cur.aggregated += weight
        if iteration == self.iteration and len(done) == len(self.chunks):
            self._iteration_done()

    # -- iterations and protocol --
    def _on_iter_start(self, k: int) -> None:
        self.iteration = k
        self.iter_start_time = self.now
        self.cur = IterationMetrics(k, self.now, self.now, 0, len(self.chunks))
        for v in self.g.nodes:
            if self.protocol == "trp":
                epoch = self.protos[v].trp_request()
                self._schedule(self.now + self._control_delay("trp_req", v), "trp_req", v, epoch, k)
            else:
                self._push(v, k, self.protos[v].epoch)

    def _on_trp_req(self, v: int, epoch: int, k: int) -> None:
        assert self.server is not None
        bundle = self.server.handle_trp(epoch, k)
        self._schedule(self.now + self._control_delay("trp_resp", v), "trp_resp", v, bundle, k)

    def _on_trp_resp(self, v: int, bundle: PolicyBundle | None, k: int) -> None:
        proto = self.protos[v]
        released = proto.trp_response(bundle)
        self._push(v, k, proto.epoch)
        for meta, pkt in released:
            self._contribute(v, pkt)

    def _push(self, v: int, k: int, epoch: int) -> None:
        self.own_epoch[v][k] = epoch
        if self.cur is not None:
            self.cur.epoch = max(self.cur.epoch, epoch)
            self.cur.emitted += len(self.chunks)
        for c in self.chunks:
            self._check(v, k, epoch, c.key)

    def _on_bundle(self, v: int, bundle: PolicyBundle) -> None:
        proto = self.protos[v]
        if bundle.epoch > proto.epoch:
            proto.adopt(bundle)

    def _on_policy_timer(self) -> None:
        assert self.server is not None
        bundle = self.policy.refresh(self.now, self.store)
        if bundle is not None:
            self.server.publish(bundle)
            if self.protocol == "naive":
                for v in self.g.nodes:
                    self._schedule(self.now + self._control_delay("bundle", v), "bundle", v, bundle)
        self._schedule(self.now + self.hyper.update_time, "policy_timer")

    def _iteration_done(self) -> None:
        assert self.cur is not None
        self.cur.end = self.now
        if self.store.estimates:
            errs = []
            for (u, v), est in self.store.estimates.items():
                true = self.links[u, v].capacity
                errs.append(abs(est.throughput - true) / true)
            self.cur.estimate_error = statistics.fmean(errs)
        self.metrics.append(self.cur)
        k = self.iteration
        self.cur = None
        oldest = min(p.epoch for p in self.protos.values())
        for v, proto in self.protos.items():
            for key in [key for key in proto.buffers if key[0] <= k]:
                del proto.buffers[key]
            proto.epoch_gc(oldest)
            self.own_epoch[v] = {i: e for i, e in self.own_epoch[v].items() if i > k}
        self.queues = {key: q for key, q in self.queues.items()
                       if key[2] >= oldest or q.primary.occupancy or any(a.occupancy for a in q.aux)}
        if k + 1 >= self.horizon:
            self.finished = True
            return
        self._schedule(self.now + self.hyper.compute_time, "iter_start", k + 1)

    def _diagnostic(self) -> dict[str, Any]:
        return {
            "time": self.now,
            "iteration": self.iteration,
            "chunks_done": len(self.done_chunks.get(self.iteration, ())),
            "chunks_total": len(self.chunks),
            "lost": self.lost,
            "nodes": {v: {"epoch": p.epoch, "state": p.state.value, "cached": len(p.cache),
                          "open_buffers": sum(1 for b in p.buffers.values() if not b.fired)}
                      for v, p in self.protos.items()},
        }

    def _trace(self, kind: str, payload: tuple) -> None:
        assert self.trace is not None
        entry: dict[str, Any] = {"t": self.now, "event": kind}
        if kind == "deliver":
            u, v, pkt = payload
            m = pkt.meta
            entry.update(link=[u, v], epoch=m.epoch, iteration=m.iteration,
                         chunk=list(m.chunk_key), aux=m.is_aux, hop=pkt.hop)
        elif kind in ("trp_req", "trp_resp"):
            entry.update(node=payload[0], iteration=payload[2],
                         epoch=payload[1] if kind == "trp_req" else
                         (payload[1].epoch if payload[1] else None))
        elif kind == "flow_done":
            entry.update(link=list(payload[0]))
        elif kind == "agg_done":
            entry.update(node=payload[0], iteration=payload[1], chunk=list(payload[3]))
        elif kind in ("iter_start", "bundle"):
            entry.update(arg=payload[0] if kind == "iter_start" else payload[0])
        self.trace.append(entry)

    def run(self, horizon: int) -> list[IterationMetrics]:
        if horizon < 1:
            raise ValueError("horizon must be >= 1")
        self.horizon = horizon
        self.chunks_by_key = {c.key: c for c in self.chunks}
        first = self.policy.initial()
        self.server = PolicyServer(first)
        if self.protocol == "naive":
            for p in self.protos.values():
                p.adopt(first)
        for t in self.g.change_times():
            self._schedule(t, "rate_change")
        if self.policy.adaptive:
            self._schedule(self.hyper.update_time, "policy_timer")
        self._schedule(0.0, "iter_start", 0)
        handlers = {
            "iter_start": self._on_iter_start,
            "trp_req": self._on_trp_req,
            "trp_resp": self._on_trp_resp,
            "flow_done": self._on_flow_done,
            "deliver": self._on_deliver,
            "agg_done": lambda v, k, e, c, r, w: self._forward(v, k, e, c, r, w),
            "report": lambda rep: self.store.merge(rep),
            "bundle": self._on_bundle,
            "policy_timer": self._on_policy_timer,
            "rate_change": self._on_rate_change,
        }
        while not self.finished:
            if self.live_events == 0 and self.active_flows == 0:
                raise DeadlockError("no progress possible with chunks outstanding",
                                    self._diagnostic())
            t, _, kind, payload = heapq.heappop(self._heap)
            self.now = t
            if kind in LIVE:
                self.live_events -= 1
            if self.now - self.iter_start_time > self.hyper.deadlock_timeout:
                raise DeadlockError("iteration exceeded the deadlock timeout", self._diagnostic())
            if self.trace is not None:
                self._trace(kind, payload)
            handlers[kind](*payload)
        return self.metrics


def run(scenario: Scenario, topology: str | PolicySource = "FAPT", horizon: int = 1, *,
        hyper: Hyperparams | None = None, seed: int = 0, **kwargs: Any) -> list[IterationMetrics]:
    sim = Simulation(scenario, topology, hyper=hyper, seed=seed, **kwargs)
    return sim.run(horizon)


def mean_completion(metrics: Iterable[IterationMetrics]) -> float:
    return statistics.fmean(m.sync_completion for m in metrics)


def measure_normalized_throughput(a: Sequence[IterationMetrics],
                                  b: Sequence[IterationMetrics]) -> float:
    """Samples-per-second of run ``a`` relative to baseline ``b``."""
    base = mean_completion(b)
    if base <= 0:
        raise ValueError("baseline completion time must be positive")
    return base / mean_completion(a)
