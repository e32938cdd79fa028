"""Policy versioning and the two policy-consistency protocols.

Primary-path traffic is gated by a topology request (TRP) exchange: a node
asks the scheduler for the current policy before every push and blocks until
answered; chunks that arrive tagged with an epoch the node has not reached
yet are cached and replayed after the switch. Auxiliary-path traffic is
source-routed: the full path travels in the message header, so relays never
consult their own (possibly stale) route tables.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field
from typing import Any

from .auxroute import AuxRouteTable
from .planner import SyncPlan


class ProtocolViolation(AssertionError):
    pass


@dataclass(frozen=True)
class PolicyBundle:
    epoch: int
    plan: SyncPlan
    aux_table: AuxRouteTable

    def to_dict(self) -> dict[str, Any]:
        return {"epoch": self.epoch, "plan": self.plan.to_dict(),
                "aux_routes": self.aux_table.to_dict()}


# Wire layout, big-endian:
#   u32 epoch | u32 iteration | u8 flags (bit 0 = is_aux) | u16 sender |
#   i64 send_ts in nanoseconds | u32 tensor index | u32 chunk index |
#   u64 chunk size | u16 path length | u16 node id * path length
_HEAD = struct.Struct(">IIBHqIIQH")
_NODE = struct.Struct(">H")
TS_SCALE = 1_000_000_000


@dataclass(frozen=True)
class MessageMeta:
    epoch: int
    is_aux: bool
    path: tuple[int, ...]
    send_ts: float
    sender: int
    tensor_index: int
    chunk_index: int
    size: int
    iteration: int = 0

    def __post_init__(self) -> None:
        if self.is_aux and (len(self.path) < 2 or self.path[0] != self.sender):
            raise ProtocolViolation("auxiliary path must start at the original sender")
        if not self.is_aux and self.path:
            raise ProtocolViolation("primary messages carry no path")
        if len(set(self.path)) != len(self.path):
            raise ProtocolViolation(f"auxiliary path {self.path} revisits a node")

    @property
    def chunk_key(self) -> tuple[int, int]:
        return (self.tensor_index, self.chunk_index)

    def encode(self) -> bytes:
        head = _HEAD.pack(self.epoch, self.iteration, 1 if self.is_aux else 0, self.sender,
                          round(self.send_ts * TS_SCALE), self.tensor_index,
                          self.chunk_index, self.size, len(self.path))
        return head + b"".join(_NODE.pack(v) for v in self.path)

    @classmethod
    def decode(cls, data: bytes) -> "MessageMeta":
        (epoch, iteration, flags, sender, ts, tensor, chunk, size,
         n) = _HEAD.unpack_from(data, 0)
        expected = _HEAD.size + n * _NODE.size
        if len(data) != expected:
            raise ValueError(f"meta header is {len(data)} bytes, expected {expected}")
        path = tuple(_NODE.unpack_from(data, _HEAD.size + i * _NODE.size)[0] for i in range(n))
        return cls(epoch, bool(flags & 1), path, ts / TS_SCALE, sender, tensor, chunk, size,
                   iteration)

    def rehop(self, send_ts: float) -> "MessageMeta":
        return MessageMeta(self.epoch, self.is_aux, self.path, send_ts, self.sender,
                           self.tensor_index, self.chunk_index, self.size, self.iteration)


class TrpState(enum.Enum):
    IDLE = "idle"
    AWAITING_RESPONSE = "awaiting"
    UP_TO_DATE = "up-to-date"


class Action(enum.Enum):
    FORWARD = "forward"
    AGGREGATE = "aggregate"
    CACHE = "cache"
    DROP = "drop"


@dataclass
class NodeProtocol:
    """Per-node policy state; driven only by its owner's events."""

    node: int
    epoch: int = 0
    state: TrpState = TrpState.IDLE
    bundles: dict[int, PolicyBundle] = field(default_factory=dict)
    cache: list[Any] = field(default_factory=list)
    buffers: dict[tuple, Any] = field(default_factory=dict)
    strict_epochs: bool = False

    @property
    def bundle(self) -> PolicyBundle | None:
        return self.bundles.get(self.epoch)

    def trp_request(self) -> int:
        if self.state is TrpState.AWAITING_RESPONSE:
            raise ProtocolViolation(f"node {self.node} already awaits a TRP response")
        self.state = TrpState.AWAITING_RESPONSE
        return self.epoch

    def trp_response(self, bundle: PolicyBundle | None) -> list[Any]:
        """Apply a response; return cached items that are now deliverable."""
        if self.state is not TrpState.AWAITING_RESPONSE:
            raise ProtocolViolation(f"node {self.node} got an unsolicited TRP response")
        if bundle is not None:
            self.adopt(bundle)
        self.state = TrpState.UP_TO_DATE
        return self.release_cache()

    def adopt(self, bundle: PolicyBundle) -> None:
        if bundle.epoch < self.epoch:
            raise ProtocolViolation(
                f"node {self.node} would move back from epoch {self.epoch} to {bundle.epoch}")
        self.bundles[bundle.epoch] = bundle
        self.epoch = bundle.epoch

    def release_cache(self) -> list[Any]:
        ready = [item for item in self.cache if item[0].epoch <= self.epoch]
        self.cache = [item for item in self.cache if item[0].epoch > self.epoch]
        return ready

    def on_receive(self, meta: MessageMeta, item: Any = None) -> tuple[Action, int | None]:
        """Decide what to do with an arriving chunk.

        Returns the action and, for ``FORWARD``, the next hop taken from the
        message's own path.
        """
        if meta.is_aux:
            if self.node not in meta.path:
                raise ProtocolViolation(
                    f"node {self.node} received aux chunk for path {meta.path}")
            i = meta.path.index(self.node)
            if i + 1 < len(meta.path):
                return Action.FORWARD, meta.path[i + 1]
        if self.strict_epochs:
            return (Action.AGGREGATE, None) if meta.epoch == self.epoch else (Action.DROP, None)
        if meta.epoch > self.epoch:
            self.cache.append((meta, item))
            return Action.CACHE, None
        return Action.AGGREGATE, None

    def epoch_gc(self, oldest_live_epoch: int) -> int:
        """Free per-epoch state older than ``oldest_live_epoch``; return count freed."""
        freed = 0
        for key in [k for k in self.buffers if k[1] < oldest_live_epoch]:
            del self.buffers[key]
            freed += 1
        for e in [e for e in self.bundles if e < oldest_live_epoch and e != self.epoch]:
            del self.bundles[e]
            freed += 1
        return freed


class PolicyServer:
    """Scheduler side of TRP: answers requests, pinning one epoch per iteration."""

    def __init__(self, bundle: PolicyBundle):
        self.bundles: dict[int, PolicyBundle] = {bundle.epoch: bundle}
        self.latest = bundle.epoch
        self.pinned: dict[int, int] = {}

    def publish(self, bundle: PolicyBundle) -> None:
        if bundle.epoch <= self.latest:
            raise ProtocolViolation("published epochs must strictly increase")
        self.bundles[bundle.epoch] = bundle
        self.latest = bundle.epoch

    def epoch_for(self, iteration: int) -> int:
        return self.pinned.setdefault(iteration, self.latest)

    def handle_trp(self, node_epoch: int, iteration: int) -> PolicyBundle | None:
        epoch = self.epoch_for(iteration)
        if node_epoch == epoch:
            return None
        if node_epoch > epoch:
            raise ProtocolViolation(f"node is ahead of the scheduler ({node_epoch} > {epoch})")
        return self.bundles[epoch]

    def gc(self, oldest_live_epoch: int) -> None:
        for e in [e for e in self.bundles if e < oldest_live_epoch and e != self.latest]:
            del self.bundles[e]
