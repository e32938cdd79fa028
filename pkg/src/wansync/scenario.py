"""YAML scenario files: overlay, model tensors, hyperparameters, clocks.

A scenario looks like::

    name: triangle
    nodes: [a, b, c]            # or a node count
    links:
      - {ends: [a, b], rate: 1.0}
      - {ends: [b, c], schedule: [[0, 4.0], [180, 2.0]], latency: 0.03, loss: 0.0002}
      - {ends: [a, c], delay: 2.0}
    tensors:
      - {id: fc1, size: 2500000}
    hyper:
      CHUNK_SIZE: 1000000
    clock:
      offsets: [0.0, 0.5, -0.2]

Unknown keys anywhere are rejected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

from .config import ConfigError, Hyperparams
from .overlay import GraphError, OverlayGraph, build_graph, graph_to_spec
from .transport import TensorSpec

TOP_KEYS = {"name", "description", "nodes", "links", "tensors", "hyper", "clock"}


class ScenarioError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = source or "scenario"
        if line is not None:
            where = f"{where}:{line}"
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class Scenario:
    name: str
    graph: OverlayGraph
    tensors: tuple[TensorSpec, ...]
    hyper: Hyperparams = field(default_factory=Hyperparams)
    clock_offsets: tuple[float, ...] = ()
    description: str = ""

    @property
    def model_size(self) -> int:
        return sum(t.size for t in self.tensors)

    def with_hyper(self, **overrides: Any) -> "Scenario":
        upper = {k.upper(): v for k, v in overrides.items()}
        return Scenario(self.name, self.graph, self.tensors, self.hyper.with_overrides(upper),
                        self.clock_offsets, self.description)


def _line_of(root: yaml.Node | None, path: list[Any]) -> int | None:
    node = root
    line = None
    for step in path:
        if isinstance(node, yaml.MappingNode):
            nxt = None
            for k, v in node.value:
                if k.value == step:
                    nxt = v
                    line = k.start_mark.line + 1
            node = nxt
        elif isinstance(node, yaml.SequenceNode) and isinstance(step, int) \
                and step < len(node.value):
            node = node.value[step]
            line = node.start_mark.line + 1
        else:
            break
        if node is None:
            break
    return line


def parse_scenario(text: str, source: str | None = None) -> Scenario:
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(exc, "problem", None) or str(exc)
        raise ScenarioError(f"malformed YAML: {problem}", line, source) from None
    if not isinstance(data, dict):
        raise ScenarioError("top level must be a mapping", 1, source)

    def fail(message: str, path: list[Any]) -> ScenarioError:
        return ScenarioError(message, _line_of(root, path), source)

    unknown = sorted(set(data) - TOP_KEYS)
    if unknown:
        raise fail(f"unknown key {unknown[0]!r}", [unknown[0]])
    try:
        graph = build_graph({"nodes": data.get("nodes"), "links": data.get("links")})
    except GraphError as exc:
        m = re.match(r"links\[(\d+)\]", str(exc))
        path: list[Any] = ["links", int(m.group(1))] if m else ["links" if "link" in str(exc) else "nodes"]
        raise fail(str(exc), path) from None

    tensors = []
    for i, raw in enumerate(data.get("tensors") or []):
        if not isinstance(raw, dict) or set(raw) - {"id", "size"} or "size" not in raw:
            raise fail("tensor entries are {id, size} mappings", ["tensors", i])
        size = raw["size"]
        if isinstance(size, bool) or not isinstance(size, int) or size < 1:
            raise fail(f"tensor size must be a positive integer, got {size!r}", ["tensors", i])
        tensors.append(TensorSpec(str(raw.get("id", f"t{i}")), size))
    if not tensors:
        raise fail("scenario declares no tensors", ["tensors"])

    hyper_raw = data.get("hyper") or {}
    if not isinstance(hyper_raw, dict):
        raise fail("'hyper' must be a mapping", ["hyper"])
    try:
        hyper = Hyperparams().with_overrides(hyper_raw)
    except ConfigError as exc:
        bad = next((k for k in hyper_raw if k.lower() in str(exc).lower()), None)
        raise fail(str(exc), ["hyper", bad] if bad else ["hyper"]) from None
    if "NUM_NODES" in hyper_raw and hyper_raw["NUM_NODES"] != graph.node_count:
        raise fail(f"NUM_NODES={hyper_raw['NUM_NODES']} but {graph.node_count} nodes declared",
                   ["hyper", "NUM_NODES"])

    clock = data.get("clock") or {}
    if not isinstance(clock, dict) or set(clock) - {"offsets"}:
        raise fail("'clock' accepts only 'offsets'", ["clock"])
    offsets = tuple(float(x) for x in clock.get("offsets", ()))
    if offsets and len(offsets) != graph.node_count:
        raise fail("clock offsets must list every node", ["clock", "offsets"])

    return Scenario(str(data.get("name", source or "scenario")), graph, tuple(tensors), hyper,
                    offsets, str(data.get("description", "")))


def load_scenario(path: str | Path) -> Scenario:
    p = Path(path)
    if not p.exists():
        bundled = bundled_path(str(path))
        if bundled is None:
            raise ScenarioError("no such file", None, str(path))
        p = bundled
    return parse_scenario(p.read_text(), str(path))


def bundled_path(name: str) -> Path | None:
    base = resources.files("wansync") / "data"
    for candidate in (name, f"{name}.yaml"):
        p = base / candidate
        if p.is_file():
            return Path(str(p))
    return None


def scenario_to_dict(s: Scenario) -> dict[str, Any]:
    out: dict[str, Any] = {"name": s.name}
    if s.description:
        out["description"] = s.description
    out.update(graph_to_spec(s.graph))
    out["tensors"] = [{"id": t.tensor_id, "size": t.size} for t in s.tensors]
    defaults = Hyperparams().as_table()
    hyper = {k: v for k, v in s.hyper.as_table().items() if defaults[k] != v}
    if hyper:
        out["hyper"] = hyper
    if s.clock_offsets:
        out["clock"] = {"offsets": list(s.clock_offsets)}
    return out


def emit_scenario(s: Scenario) -> str:
    return yaml.safe_dump(scenario_to_dict(s), sort_keys=False, default_flow_style=None)
