"""Ablation (lite/std/pro) and root-count scaling on the 9-node backbone.

By default runs the bundled scenario. ``--generator-seeds 1 2 3`` rebuilds the
backbone with other random rate schedules to show how much the orderings move.
Writes one CSV to stdout or ``--out``.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

from make_scenarios import internet2  # noqa: E402

from wansync import experiments as ex  # noqa: E402
from wansync.scenario import load_scenario, parse_scenario  # noqa: E402

import yaml  # noqa: E402


def scenarios(generator_seeds):
    if not generator_seeds:
        yield "bundled", load_scenario("internet2")
    for seed in generator_seeds:
        spec = internet2(seed, 30.0, 12)
        yield f"gen{seed}", parse_scenario(yaml.safe_dump(spec), f"internet2-gen{seed}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--horizon", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--generator-seeds", type=int, nargs="*", default=[])
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()

    rows = []
    for tag, s in scenarios(args.generator_seeds):
        star = ex.run_one(s, "STAR", args.horizon, args.seed)
        for r in ex.ablate(s, ["lite", "std", "pro"], args.horizon, args.seed):
            rows.append((tag, "stage", r.label, r.mean_completion,
                         star.mean_completion / r.mean_completion))
        for n in (1, 3, 5, 7, 9):
            r = ex.run_one(s.with_hyper(NUM_ROOT_SERVERS=n), "FAPT", args.horizon, args.seed)
            rows.append((tag, "roots", n, r.mean_completion,
                         star.mean_completion / r.mean_completion))
    text = ex.csv_text("ablation", ["scenario", "axis", "setting", "mean_completion",
                                    "normalized_vs_STAR"], rows)
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
