"""Command-line front end.

Every common flag can also come from the environment: ``WANSYNC_SCENARIO``,
``WANSYNC_SEED``, ``WANSYNC_HORIZON``, ``WANSYNC_OUT`` and ``WANSYNC_SET``
(comma-separated ``KEY=VALUE`` pairs, applied before any ``--set``).
Exit codes: 0 success, 1 runtime or simulation failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Sequence

from . import experiments as ex
from .config import ConfigError
from .consistency import ProtocolViolation
from .overlay import GraphError, delay_view
from .planner import PlanningError, build_plan
from .auxroute import search_aux_paths
from .scenario import Scenario, ScenarioError, load_scenario
from .simnet import DeadlockError, Simulation, SimulationError

ENV_PREFIX = "WANSYNC_"


class UsageError(Exception):
    pass


def _env(name: str, default: Any = None) -> Any:
    return os.environ.get(ENV_PREFIX + name, default)


def _parse_sets(items: Sequence[str]) -> dict[str, str]:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        out[key.strip().upper()] = value.strip()
    return out


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", default=argparse.SUPPRESS,
                   help="scenario YAML file or bundled name (internet2, fig1, triangle)")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--horizon", type=int, default=argparse.SUPPRESS, help="iterations per run")
    p.add_argument("--out", type=Path, default=argparse.SUPPRESS,
                   help="output directory; tables go to stdout when omitted")
    p.add_argument("--set", dest="sets", action="append", default=argparse.SUPPRESS,
                   metavar="KEY=VALUE", help="hyperparameter override, repeatable")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wansync", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    _common(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="print the synchronization plan and aux routes")
    p.add_argument("--at", type=float, default=0.0, help="plan on link rates at this time")
    p.add_argument("--json", action="store_true")
    _common(p)

    p = sub.add_parser("compare", help="compare synchronization topologies")
    p.add_argument("--kinds", default=",".join(ex.KINDS))
    _common(p)

    p = sub.add_parser("ablate", help="lite / std / pro stages")
    p.add_argument("--stages", default="lite,std,pro")
    _common(p)

    p = sub.add_parser("sweep", help="sensitivity sweep over one hyperparameter")
    p.add_argument("--param", required=True)
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--kind", default="FAPT")
    p.add_argument("--workers", type=int, default=1)
    _common(p)

    p = sub.add_parser("run", help="one simulation run with per-iteration metrics")
    p.add_argument("--kind", default="FAPT")
    p.add_argument("--protocol", choices=("trp", "naive"), default="trp")
    p.add_argument("--trace", type=Path, help="write every event as JSON lines")
    _common(p)
    return parser


def _settings(args: argparse.Namespace) -> tuple[Scenario, int, int, Path | None]:
    scenario_ref = getattr(args, "scenario", None) or _env("SCENARIO")
    if not scenario_ref:
        raise UsageError("no scenario given (use --scenario or WANSYNC_SCENARIO)")
    try:
        seed = int(getattr(args, "seed", None) if hasattr(args, "seed") else _env("SEED", 0))
        horizon = int(getattr(args, "horizon", None) if hasattr(args, "horizon")
                      else _env("HORIZON", 10))
    except ValueError as exc:
        raise UsageError(f"bad numeric setting: {exc}") from None
    if horizon < 1:
        raise UsageError("horizon must be >= 1")
    out = getattr(args, "out", None) or (Path(_env("OUT")) if _env("OUT") else None)
    env_sets = [s for s in (_env("SET") or "").split(",") if s.strip()]
    overrides = _parse_sets(env_sets + list(getattr(args, "sets", [])))
    scenario = load_scenario(scenario_ref)
    if overrides:
        scenario = scenario.with_hyper(**overrides)
    return scenario, seed, horizon, out


def _emit(out: Path | None, files: dict[str, str], primary: str) -> None:
    if out is None:
        sys.stdout.write(files[primary])
        return
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text)
    print(f"wrote {', '.join(sorted(files))} to {out}")


def cmd_plan(args: argparse.Namespace) -> int:
    scenario, _, _, out = _settings(args)
    g, hyper = scenario.graph, scenario.hyper
    d = delay_view(g, args.at)
    plan = build_plan(g, d, n=min(hyper.num_root_servers, g.node_count))
    table = search_aux_paths(g, d, hyper.max_aux_paths)
    if args.json:
        payload = {"plan": plan.to_dict(d), "aux_routes": table.to_dict()}
        _emit(out, {"plan.json": json.dumps(payload, indent=2, sort_keys=True) + "\n"},
              "plan.json")
        return 0
    lines = [f"scenario {scenario.name}: {g.node_count} nodes, {len(g.links)} links, "
             f"{len(plan.roots)} tree(s)"]
    delays = plan.delays(d)
    for r in plan.roots:
        edges = " ".join(f"{g.name(c)}->{g.name(p)}" for c, p in plan.trees[r].edges())
        lines.append(f"root {g.name(r)}: tree_delay={delays[r]:.6g} score={plan.scores[r]:.6g} "
                     f"share={plan.shares[r]:.4f}  {edges}")
    lines.append("aux routes:")
    for (i, j), paths in sorted(table.routes.items()):
        shown = " | ".join("-".join(g.name(v) for v in p) for p in paths)
        lines.append(f"  {g.name(i)}->{g.name(j)}: {shown}")
    _emit(out, {"plan.txt": "\n".join(lines) + "\n"}, "plan.txt")
    return 0


def _split(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def cmd_compare(args: argparse.Namespace) -> int:
    scenario, seed, horizon, out = _settings(args)
    kinds = [k.upper() for k in _split(args.kinds)]
    unknown = [k for k in kinds if k.split(":")[0] not in ex.KINDS]
    if unknown or not kinds:
        raise UsageError(f"unknown kind(s) {unknown}; choose from {', '.join(ex.KINDS)}")
    results = ex.compare(scenario, kinds, horizon, seed)
    meta = {"command": "compare", "scenario": scenario.name, "seed": seed, "horizon": horizon}
    _emit(out, {"compare.csv": ex.summary_table(results, "STAR", "compare"),
                "iterations.csv": ex.iteration_table(results),
                "summary.json": ex.summary_json(results, "STAR", meta)}, "compare.csv")
    for r in results:
        if not r.ok:
            print(f"warning: {r.label} failed: {r.error}", file=sys.stderr)
    return 0 if any(r.ok for r in results) else 1


def cmd_ablate(args: argparse.Namespace) -> int:
    scenario, seed, horizon, out = _settings(args)
    stages = _split(args.stages)
    results = ex.ablate(scenario, stages, horizon, seed)
    meta = {"command": "ablate", "scenario": scenario.name, "seed": seed, "horizon": horizon}
    base = stages[0]
    _emit(out, {"ablate.csv": ex.summary_table(results, base, "ablate"),
                "iterations.csv": ex.iteration_table(results),
                "summary.json": ex.summary_json(results, base, meta)}, "ablate.csv")
    return 0 if all(r.ok for r in results) else 1


def cmd_sweep(args: argparse.Namespace) -> int:
    scenario, seed, horizon, out = _settings(args)
    param = args.param.upper()
    if param not in ex.SWEEPABLE:
        raise UsageError(f"cannot sweep {param}; choose from {', '.join(ex.SWEEPABLE)}")
    values = _split(args.values)
    results = ex.sweep(scenario, param, values, horizon, seed, args.kind.upper(), args.workers)
    meta = {"command": "sweep", "parameter": param, "scenario": scenario.name, "seed": seed,
            "horizon": horizon}
    _emit(out, {"sweep.csv": ex.sweep_table(results, param, values, scenario.model_size),
                "iterations.csv": ex.iteration_table(results),
                "summary.json": ex.summary_json(results, results[0].label, meta)}, "sweep.csv")
    return 0 if all(r.ok for r in results) else 1


def cmd_run(args: argparse.Namespace) -> int:
    scenario, seed, horizon, out = _settings(args)
    sim = Simulation(scenario, args.kind.upper(), seed=seed, protocol=args.protocol,
                     trace=args.trace is not None)
    metrics = sim.run(horizon)
    result = ex.RunResult(args.kind.upper(), args.kind.upper(), metrics,
                          capacity={k: link.capacity for k, link in sim.links.items()})
    if args.trace is not None:
        with open(args.trace, "w") as fh:
            for entry in sim.trace or ():
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
    _emit(out, {"iterations.csv": ex.iteration_table([result])}, "iterations.csv")
    return 0


COMMANDS = {"plan": cmd_plan, "compare": cmd_compare, "ablate": cmd_ablate,
            "sweep": cmd_sweep, "run": cmd_run}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ScenarioError, ConfigError, GraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DeadlockError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(json.dumps(exc.diagnostic, indent=2, default=str), file=sys.stderr)
        return 1
    except (PlanningError, SimulationError, ProtocolViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
