"""Passive link throughput estimation from ordinary chunk transfers.

Every chunk carries its send timestamp; the receiver stamps its arrival and,
once enough large-enough chunks have crossed a directed link, averages their
per-chunk rates into a link estimate that is reported to the scheduler.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .overlay import Edge, OverlayGraph, edge_key


@dataclass(frozen=True)
class ProbeSample:
    sender: int
    receiver: int
    send_ts: float
    recv_ts: float
    size: float

    @property
    def delay(self) -> float:
        return self.recv_ts - self.send_ts


@dataclass(frozen=True)
class LinkEstimate:
    sender: int
    receiver: int
    throughput: float
    sample_count: int
    updated_at: float

    @property
    def link(self) -> tuple[int, int]:
        return (self.sender, self.receiver)


@dataclass(frozen=True)
class ClockModel:
    offsets: Mapping[int, float]
    skews: Mapping[int, float] = field(default_factory=dict)
    reference: int | None = None

    def __post_init__(self) -> None:
        if self.reference is not None and self.offsets.get(self.reference, 0.0) != 0.0:
            raise ValueError("the reference node must have zero offset")


def correct_clock(ts: float, node: int, c: ClockModel) -> float:
    if node not in c.offsets:
        raise KeyError(f"node {node} has no clock entry")
    return ts - c.offsets[node] - c.skews.get(node, 0.0) * ts


def ntp_offset(t1: float, t2: float, t3: float, t4: float) -> float:
    """Clock offset of a node from one request/response exchange.

    ``t1``/``t4`` are the node's send and receive times on its own clock,
    ``t2``/``t3`` the reference's receive and reply times. Exact when the
    two directions have equal delay.
    """
    return ((t1 - t2) + (t4 - t3)) / 2


def split_samples(samples: Iterable[ProbeSample], min_size: float
                  ) -> tuple[list[ProbeSample], int]:
    """Drop undersized samples; return the rest and the count of bad delays."""
    kept, anomalies = [], 0
    for s in samples:
        if s.size < min_size:
            continue
        if not s.delay > 0:
            anomalies += 1
            continue
        kept.append(s)
    return kept, anomalies


def mean_rate(samples: Sequence[ProbeSample]) -> float:
    return sum(s.size / s.delay for s in samples) / len(samples)


def estimate_throughput(samples: Sequence[ProbeSample], min_size: float,
                        window: int) -> LinkEstimate | None:
    kept, _ = split_samples(samples, min_size)
    if len(kept) < window:
        return None
    recent = kept[-window:]
    last = recent[-1]
    return LinkEstimate(last.sender, last.receiver, mean_rate(recent), len(recent),
                        last.recv_ts)


def estimate_roundtrip(size: float, send_ts: float, ack_recv_ts: float) -> float:
    rtt = ack_recv_ts - send_ts
    if not rtt > 0:
        raise ValueError("round trip must be positive")
    return size / (rtt / 2)


class ProbeWindow:
    """Sliding window of the newest qualifying samples on one directed link."""

    def __init__(self, sender: int, receiver: int, min_size: float, window: int):
        self.sender = sender
        self.receiver = receiver
        self.min_size = min_size
        self.window = window
        self.samples: deque[ProbeSample] = deque(maxlen=window)
        self.anomalies = 0
        self.filtered = 0

    def add(self, sample: ProbeSample) -> LinkEstimate | None:
        if sample.size < self.min_size:
            self.filtered += 1
            return None
        if not sample.delay > 0:
            self.anomalies += 1
            return None
        self.samples.append(sample)
        if len(self.samples) < self.window:
            return None
        return LinkEstimate(self.sender, self.receiver, mean_rate(self.samples),
                            len(self.samples), sample.recv_ts)


@dataclass(frozen=True)
class NetworkReport:
    reporter: int
    estimates: tuple[LinkEstimate, ...]


def report(reporter: int, estimates: Iterable[LinkEstimate]) -> NetworkReport:
    return NetworkReport(reporter, tuple(estimates))


class LinkStateStore:
    """Scheduler-side view of directed link throughput; newest estimate wins."""

    def __init__(self) -> None:
        self.estimates: dict[tuple[int, int], LinkEstimate] = {}
        self.version = 0

    def merge(self, rep: NetworkReport) -> int:
        changed = 0
        for est in rep.estimates:
            old = self.estimates.get(est.link)
            if old is None or est.updated_at >= old.updated_at:
                self.estimates[est.link] = est
                changed += 1
        if changed:
            self.version += 1
        return changed

    def rate(self, u: int, v: int) -> float | None:
        est = self.estimates.get((u, v))
        return est.throughput if est else None

    def planning_rates(self, g: OverlayGraph,
                       fallback: Callable[[Edge], float]) -> dict[Edge, float]:
        """Undirected planning rate per link: the slower measured direction,
        or ``fallback(edge)`` when neither direction has been measured."""
        rates = {}
        for u, v in g.edges():
            seen = [r for r in (self.rate(u, v), self.rate(v, u)) if r is not None]
            rates[edge_key(u, v)] = min(seen) if seen else fallback((u, v))
        return rates
