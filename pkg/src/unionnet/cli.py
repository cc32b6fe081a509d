"""Command line front end: prepare, train, grid, sweep."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .data import BundleError, SbmSpec, generate_sbm, load_bundle, write_bundle
from .experiments import (SWEEP_PARAMETERS, ExperimentSpec, run_experiment,
                          run_sweep)
from .gcn import TrainHyper, save_params
from .graph import WalkConfig
from .noise import NOISE_TYPES, build_transition, corrupt_labels, write_flip_log
from .training import METHODS, TrainConfig, train


def _add_sbm_flags(p: argparse.ArgumentParser):
    p.add_argument("--blocks", type=int, default=3)
    p.add_argument("--nodes-per-block", type=int, default=200)
    p.add_argument("--p-in", type=float, default=0.05)
    p.add_argument("--p-out", type=float, default=0.005)
    p.add_argument("--feature-dim", type=int, default=16)
    p.add_argument("--feature-signal", type=float, default=1.0)


def _add_train_flags(p: argparse.ArgumentParser):
    p.add_argument("--method", choices=METHODS, default="unionnet")
    p.add_argument("--noise-type", choices=NOISE_TYPES, default="symmetric")
    p.add_argument("--noise-rate", type=float, default=0.0)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--walk-length", type=int, default=10)
    p.add_argument("--walks-per-node", type=int, default=10)
    p.add_argument("--epochs", type=int, default=400)
    p.add_argument("--pretrain-epochs", type=int, default=40)
    p.add_argument("--patience", type=int, default=None)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--weight-decay", type=float, default=5e-4)
    p.add_argument("--dropout", type=float, default=0.5)
    p.add_argument("--hidden", type=int, default=16)
    p.add_argument("--gce-q", type=float, default=0.7)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="unionnet",
        description="Noise-robust GCN training via random-walk label aggregation.")
    sub = parser.add_subparsers(dest="command", required=True)

    prep = sub.add_parser("prepare", help="generate an SBM bundle or validate an existing one")
    prep.add_argument("--validate", metavar="BUNDLE", help="load a bundle and report its stats")
    prep.add_argument("--out", help="directory for a freshly generated SBM bundle")
    prep.add_argument("--seed", type=int, default=0)
    _add_sbm_flags(prep)

    tr = sub.add_parser("train", help="single training run on a bundle")
    tr.add_argument("--bundle", required=True)
    tr.add_argument("--out", help="directory for log.csv, checkpoint.npz, result.json, flips.tsv")
    tr.add_argument("--seed", type=int, default=0)
    _add_train_flags(tr)

    gr = sub.add_parser("grid", help="run a noise-grid experiment from a JSON spec")
    gr.add_argument("--spec", required=True)
    gr.add_argument("--out", required=True)
    gr.add_argument("--seed", type=int, default=0, help="master seed added to every spec seed")

    sw = sub.add_parser("sweep", help="sensitivity sweep over alpha, beta, or walk_length")
    sw.add_argument("--spec", required=True)
    sw.add_argument("--param", required=True, choices=SWEEP_PARAMETERS)
    sw.add_argument("--values", required=True,
                    help="comma-separated sweep values, e.g. 0,0.25,0.5,0.75,1")
    sw.add_argument("--out", required=True)
    sw.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_prepare(args) -> int:
    if args.validate:
        try:
            g = load_bundle(args.validate)
        except (BundleError, IndexError, ValueError) as exc:
            print(f"invalid bundle: {exc}", file=sys.stderr)
            return 1
        print(f"ok: {g.name or args.validate} n={g.n} d={g.d} m={g.m} "
              f"edges={len(g.edges)} train={int(g.train_mask.sum())} "
              f"val={int(g.val_mask.sum())} test={int(g.test_mask.sum())}")
        return 0
    if not args.out:
        print("prepare needs --out (generate) or --validate BUNDLE", file=sys.stderr)
        return 2
    spec = SbmSpec(blocks=args.blocks, nodes_per_block=args.nodes_per_block,
                   p_in=args.p_in, p_out=args.p_out, feature_dim=args.feature_dim,
                   feature_signal=args.feature_signal, seed=args.seed)
    graph = generate_sbm(spec)
    write_bundle(graph, args.out)
    print(f"wrote {graph.name} (n={graph.n}, edges={len(graph.edges)}) to {args.out}")
    return 0


def _cmd_train(args) -> int:
    graph = load_bundle(args.bundle)
    cfg = TrainConfig(
        method=args.method,
        alpha=args.alpha,
        beta=args.beta,
        walk=WalkConfig(args.walk_length, args.walks_per_node, seed=args.seed),
        hyper=TrainHyper(lr=args.lr, weight_decay=args.weight_decay,
                         dropout=args.dropout, hidden=args.hidden),
        epochs=args.epochs,
        pretrain_epochs=args.pretrain_epochs,
        patience=args.patience,
        gce_q=args.gce_q,
        seed=args.seed,
    )
    q = build_transition(args.noise_type, args.noise_rate, graph.m) \
        if args.noise_rate > 0 else None
    if q is not None:
        corrupted = corrupt_labels(graph, q, seed=args.seed)
        labels = corrupted.labels_noisy
    else:
        corrupted, labels = None, graph.labels

    out = Path(args.out) if args.out else None
    log_path = out / "log.csv" if out else None
    run = train(graph, labels, cfg, log_path=log_path)
    if out:
        out.mkdir(parents=True, exist_ok=True)
        save_params(run.params, out / "checkpoint.npz")
        if corrupted is not None:
            write_flip_log(corrupted, out / "flips.tsv")
        (out / "result.json").write_text(json.dumps({
            "method": cfg.method, "noise_type": args.noise_type,
            "noise_rate": args.noise_rate, "seed": args.seed,
            "best_epoch": run.best_epoch, "val_f1": run.best_val_f1,
            "test_f1": run.test_f1, "wall_time": run.wall_time,
        }, indent=2) + "\n", encoding="utf-8")
    print(f"{cfg.method} {args.noise_type}@{args.noise_rate:g} seed={args.seed}: "
          f"test micro-F1 {run.test_f1:.4f} (val {run.best_val_f1:.4f} "
          f"at epoch {run.best_epoch})")
    return 0


def _cmd_grid(args) -> int:
    spec = ExperimentSpec.from_json(args.spec)
    table = run_experiment(spec, args.out, master_seed=args.seed)
    print(table.to_text(), end="")
    return 1 if table.any_failed else 0


def _cmd_sweep(args) -> int:
    spec = ExperimentSpec.from_json(args.spec)
    values = [float(v) for v in args.values.split(",") if v != ""]
    points = run_sweep(spec, args.param, values, args.out, master_seed=args.seed)
    for p in points:
        mean = "FAILED" if p.mean_f1 is None else f"{p.mean_f1:.4f}"
        print(f"{args.param}={p.value:g}: mean test micro-F1 {mean}")
    return 1 if any(p.failed for p in points) else 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "prepare": _cmd_prepare,
        "train": _cmd_train,
        "grid": _cmd_grid,
        "sweep": _cmd_sweep,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
