#!/usr/bin/env python3
"""Benchmark-table reproduction on a converted Cora bundle.

Needs the text bundle produced by the converter package (see converter/).
Covers the comparison cells (gcn_ce vs unionnet at symmetric 10/20/40/60 and
pairflip 10/20/30/40) plus the reweight-only ablation at symmetric 40%.
"""

import argparse
import sys
from pathlib import Path

from unionnet.experiments import ExperimentSpec, run_experiment


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--bundle", default="data/cora")
    parser.add_argument("--out", default="results/cora")
    parser.add_argument("--seeds", default="0,1,2,3,4")
    parser.add_argument("--quick", action="store_true",
                        help="only the symmetric 20%% / pairflip 40%% cells")
    args = parser.parse_args()
    if not (Path(args.bundle) / "meta.tsv").is_file():
        print(f"no bundle at {args.bundle}; convert the raw files first "
              "(see converter/README.md)", file=sys.stderr)
        return 2

    if args.quick:
        grid = (("symmetric", 0.2), ("pairflip", 0.4))
    else:
        grid = (("symmetric", 0.1), ("symmetric", 0.2), ("symmetric", 0.4),
                ("symmetric", 0.6), ("pairflip", 0.1), ("pairflip", 0.2),
                ("pairflip", 0.3), ("pairflip", 0.4))
    spec = ExperimentSpec(
        name="cora",
        bundle=args.bundle,
        noise_grid=grid,
        methods=("gcn_ce", "gce", "unionnet", "unionnet_r", "unionnet_rc"),
        seeds=tuple(int(s) for s in args.seeds.split(",")),
        walk_length=10,
        walks_per_node=10,
        epochs=400,
        pretrain_epochs=40,
        patience=100,
    )
    table = run_experiment(spec, args.out)
    print(table.to_text())
    return 1 if table.any_failed else 0


if __name__ == "__main__":
    sys.exit(main())
