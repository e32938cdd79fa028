"""Comparison, ablation and sweep drivers plus their CSV/JSON emitters."""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

from .config import ConfigError
from .consistency import ProtocolViolation
from .planner import PlanningError
from .scenario import Scenario
from .simnet import IterationMetrics, Simulation, SimulationError, mean_completion

SCHEMA_VERSION = 1
KINDS = ("STAR", "BKT", "MST", "FAPT")
STAGES: dict[str, dict[str, Any]] = {
    "lite": {"ENABLE_AWARENESS": False, "ENABLE_AUX_PATH": False},
    "std": {"ENABLE_AWARENESS": True, "ENABLE_AUX_PATH": False},
    "pro": {"ENABLE_AWARENESS": True, "ENABLE_AUX_PATH": True},
}
SWEEPABLE = ("CHUNK_SIZE", "UPDATE_TIME", "PROBE_CHUNK_SIZE", "PROBE_CHUNK_NUM",
             "PRIMARY_BUSY_BOUND", "AUXILIARY_QUEUE_LENGTH")


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: Scenario
    kinds: tuple[str, ...] = ("FAPT",)
    overrides: dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    horizon: int = 10
    out: Path | None = None

    def resolved(self) -> Scenario:
        return self.scenario.with_hyper(**self.overrides) if self.overrides else self.scenario


@dataclass
class RunResult:
    label: str
    kind: str
    metrics: list[IterationMetrics] | None = None
    error: str | None = None
    capacity: dict[tuple[int, int], float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.metrics is not None

    @property
    def mean_completion(self) -> float | None:
        return mean_completion(self.metrics) if self.metrics else None


def run_one(scenario: Scenario, kind: str, horizon: int, seed: int, label: str | None = None
            ) -> RunResult:
    label = label or kind
    try:
        sim = Simulation(scenario, kind, seed=seed)
        metrics = sim.run(horizon)
    except (PlanningError, SimulationError, ProtocolViolation) as exc:
        return RunResult(label, kind, error=f"{type(exc).__name__}: {exc}")
    caps = {k: link.capacity for k, link in sim.links.items()}
    return RunResult(label, kind, metrics, capacity=caps)


def compare(scenario: Scenario, kinds: Sequence[str], horizon: int, seed: int
            ) -> list[RunResult]:
    if not kinds:
        raise ConfigError("compare needs at least one topology kind")
    return [run_one(scenario, k, horizon, seed) for k in kinds]


def ablate(scenario: Scenario, stages: Sequence[str], horizon: int, seed: int
           ) -> list[RunResult]:
    bad = [s for s in stages if s not in STAGES]
    if bad or not stages:
        raise ConfigError(f"unknown stage(s) {bad}; choose from {sorted(STAGES)}")
    return [run_one(scenario.with_hyper(**STAGES[s]), "FAPT", horizon, seed, label=s)
            for s in stages]


def _sweep_point(args: tuple[Scenario, str, Any, str, int, int]) -> RunResult:
    scenario, param, value, kind, horizon, seed = args
    return run_one(scenario.with_hyper(**{param: value}), kind, horizon, seed,
                   label=f"{param}={value}")


def sweep(scenario: Scenario, param: str, values: Sequence[Any], horizon: int, seed: int,
          kind: str = "FAPT", workers: int = 1) -> list[RunResult]:
    param = param.upper()
    if param not in SWEEPABLE:
        raise ConfigError(f"cannot sweep {param}; choose from {', '.join(SWEEPABLE)}")
    if not values:
        raise ConfigError("sweep needs at least one value")
    for v in values:  # fail on bad values before running anything
        scenario.with_hyper(**{param: v})
    jobs = [(scenario, param, v, kind, horizon, seed) for v in values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_point, jobs))
    return [_sweep_point(j) for j in jobs]


# --- emission -------------------------------------------------------------

def _fmt(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def csv_text(table: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    buf.write(f"# wansync {table} schema v{SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def normalized(results: Sequence[RunResult], baseline: str) -> dict[str, float | None]:
    base = next((r for r in results if r.label == baseline and r.ok), None)
    out: dict[str, float | None] = {}
    for r in results:
        if base is None or not r.ok:
            out[r.label] = None
        else:
            out[r.label] = base.mean_completion / r.mean_completion  # type: ignore[operator]
    return out


def summary_table(results: Sequence[RunResult], baseline: str, table: str) -> str:
    norm = normalized(results, baseline)
    rows = [(r.label, r.kind, r.mean_completion, norm[r.label], r.error or "") for r in results]
    return csv_text(table, ["label", "kind", "mean_completion", f"normalized_vs_{baseline}",
                            "error"], rows)


def sweep_table(results: Sequence[RunResult], param: str, values: Sequence[Any],
                model_size: int) -> str:
    rows = []
    first = results[0].mean_completion if results and results[0].ok else None
    for r, v in zip(results, values):
        mc = r.mean_completion
        rows.append((param, v, mc, model_size / mc if mc else None,
                     first / mc if first and mc else None, r.error or ""))
    return csv_text("sweep", ["parameter", "value", "mean_completion", "throughput",
                              "normalized_vs_first", "error"], rows)


def iteration_table(results: Sequence[RunResult]) -> str:
    rows = []
    for r in results:
        for m in r.metrics or ():
            rows.append((r.label, m.iteration, m.start, m.end, m.sync_completion, m.epoch,
                         m.chunks, m.aux_chunks, m.cached_chunks, m.utilization(r.capacity),
                         m.estimate_error))
    return csv_text("iterations", ["label", "iteration", "start", "end", "sync_completion",
                                   "epoch", "chunks", "aux_chunks", "cached_chunks",
                                   "utilization", "estimate_error"], rows)


def summary_json(results: Sequence[RunResult], baseline: str, meta: dict[str, Any]) -> str:
    norm = normalized(results, baseline)
    runs = []
    for r in results:
        runs.append({
            "label": r.label, "kind": r.kind, "ok": r.ok, "error": r.error,
            "iterations": len(r.metrics or ()),
            "mean_completion": r.mean_completion,
            f"normalized_vs_{baseline}": norm[r.label],
            "aux_chunks": sum(m.aux_chunks for m in r.metrics or ()),
        })
    return json.dumps({"schema": SCHEMA_VERSION, **meta, "runs": runs}, indent=2,
                      sort_keys=True) + "\n"
