"""Hyperparameter sensitivity on the bundled backbone, one sweep per parameter."""

import argparse
import sys
from pathlib import Path

from wansync import experiments as ex
from wansync.scenario import load_scenario

GRID = {
    "CHUNK_SIZE": [125_000, 250_000, 500_000, 1_000_000, 2_000_000, 4_000_000],
    "UPDATE_TIME": [1.0, 2.5, 5.0, 10.0, 30.0],
    "PROBE_CHUNK_NUM": [1, 2, 4, 8],
    "PRIMARY_BUSY_BOUND": [1, 2, 4, 8],
    "AUXILIARY_QUEUE_LENGTH": [0, 1, 2, 4],
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenario", default="internet2")
    ap.add_argument("--horizon", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", type=Path, required=True)
    args = ap.parse_args()

    s = load_scenario(args.scenario)
    args.out.mkdir(parents=True, exist_ok=True)
    for param, values in GRID.items():
        results = ex.sweep(s, param, values, args.horizon, args.seed, workers=args.workers)
        (args.out / f"sweep_{param.lower()}.csv").write_text(
            ex.sweep_table(results, param, values, s.model_size))
        print(f"{param}: " + ", ".join(f"{v}={r.mean_completion:.3f}s"
                                      for v, r in zip(values, results)), file=sys.stderr)


if __name__ == "__main__":
    main()
