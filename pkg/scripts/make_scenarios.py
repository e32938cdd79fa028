"""Regenerate the bundled scenario files under src/wansync/data."""

from __future__ import annotations

import argparse
import random
from pathlib import Path

import yaml

DATA = Path(__file__).resolve().parents[1] / "src" / "wansync" / "data"

# 4-byte parameters: 1 Mbps = 31_250 params/s
PARAMS_PER_MBPS = 1e6 / 8 / 4

SITES = ["CHI", "SEA", "NYC", "SNV", "LA", "DEN", "KC", "HOU", "ATL"]
BACKBONE = [(0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (0, 7), (0, 8),
            (1, 3), (1, 4), (2, 5), (2, 6), (3, 7), (3, 8),
            (1, 5), (4, 6), (5, 7), (6, 8), (2, 8), (4, 7)]


def internet2(seed: int, period: float, changes: int) -> dict:
    rng = random.Random(seed)
    links = []
    for a, b in BACKBONE:
        schedule = [[round(i * period, 3), round(rng.uniform(20, 155) * PARAMS_PER_MBPS)]
                    for i in range(changes + 1)]
        links.append({"ends": [SITES[a], SITES[b]], "schedule": schedule,
                      "latency": 0.03, "loss": 0.0002})
    return {
        "name": "internet2",
        "description": "9-site backbone, link rates redrawn from 20-155 Mbps every "
                       f"{period:g} s (params/s, 4-byte parameters)",
        "nodes": SITES,
        "links": links,
        "tensors": [{"id": f"layer{i}", "size": 4_000_000} for i in range(6)],
        "hyper": {"CHUNK_SIZE": 500_000, "PROBE_CHUNK_SIZE": 250_000, "UPDATE_TIME": 5.0,
                  "DEFAULT_RATE": round(20 * PARAMS_PER_MBPS)},
    }


def fig1() -> dict:
    # balanced tree rooted at v1; delays are seconds per unit
    edges = [(0, 1, 24), (0, 2, 15), (0, 3, 18), (0, 4, 50),
             (1, 5, 24), (1, 6, 10), (1, 7, 17),
             (2, 8, 20), (2, 13, 12),
             (3, 9, 23), (3, 10, 5), (3, 12, 16),
             (4, 11, 7)]
    names = [f"v{i + 1}" for i in range(14)]
    return {
        "name": "fig1",
        "description": "14-node balanced aggregation tree with integer delays",
        "nodes": names,
        "links": [{"ends": [names[a], names[b]], "delay": w} for a, b, w in edges],
        "tensors": [{"id": "w", "size": 1}],
        "hyper": {"CHUNK_SIZE": 1, "PROBE_CHUNK_SIZE": 1, "NUM_ROOT_SERVERS": 1,
                  "ENABLE_AUX_PATH": False, "ENABLE_AWARENESS": False},
    }


def triangle() -> dict:
    return {
        "name": "triangle",
        "nodes": ["a", "b", "c"],
        "links": [{"ends": ["a", "b"], "delay": 1}, {"ends": ["b", "c"], "delay": 1},
                  {"ends": ["a", "c"], "delay": 2}],
        "tensors": [{"id": "w", "size": 2}],
        "hyper": {"CHUNK_SIZE": 1, "PROBE_CHUNK_SIZE": 1, "NUM_ROOT_SERVERS": 1},
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--period", type=float, default=30.0)
    ap.add_argument("--changes", type=int, default=12)
    ap.add_argument("--out", type=Path, default=DATA)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name, spec in [("internet2", internet2(args.seed, args.period, args.changes)),
                       ("fig1", fig1()), ("triangle", triangle())]:
        path = args.out / f"{name}.yaml"
        path.write_text(yaml.safe_dump(spec, sort_keys=False, default_flow_style=None, width=100))
        print(path)


if __name__ == "__main__":
    main()
