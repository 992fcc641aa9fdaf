"""Command-line interface: ingestion, embeddings, classification, and the
scalability experiment. Every run writes a manifest next to its outputs;
with --threads 1 and a fixed seed, outputs are bit-reproducible."""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .evaluate import (DEFAULT_C_GRID, EvalConfig, cross_validate,
                       scalability_run, write_plot_data, write_timing_csv)
from .features import (CostGuardError, read_embeddings_csv, required_samples,
                       write_embeddings_csv, write_embeddings_json)
from .graphs import GraphFormatError, load_collection
from .kernels import KernelSpec, rbf_sigma_grid
from .pipeline import datadriven_embeddings, feature_embeddings
from .training import TrainConfig, save_model
from .svm import SmoConvergenceError
from .walks import enumerate_vocabulary, write_vocabulary

EXIT_VALIDATION = 2
EXIT_RUNTIME = 3
DATA_DIR_ENV = "ANONWALKS_DATA"


class ValidationFailure(Exception):
    pass


def _resolve_dataset(path):
    if os.path.isdir(path):
        return path
    cache = os.environ.get(DATA_DIR_ENV)
    if cache:
        candidate = os.path.join(cache, path)
        if os.path.isdir(candidate):
            return candidate
    raise ValidationFailure(
        f"dataset directory not found: {path} "
        f"(also looked under ${DATA_DIR_ENV})")


def _write_manifest(out_dir, subcommand, params, inputs, outputs):
    manifest = {"tool": "anonwalks", "version": __version__,
                "subcommand": subcommand, "parameters": params,
                "inputs": inputs, "outputs": sorted(outputs)}
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w") as f:
        json.dump(manifest, f, sort_keys=True, indent=1)
        f.write("\n")
    return path


def _prepare_out(out_dir):
    os.makedirs(out_dir, exist_ok=True)


def cmd_embed_fb(args):
    dataset = _resolve_dataset(args.dataset)
    if args.l < 1:
        raise ValidationFailure("--l must be >= 1")
    if args.mode == "sampled" and not (args.eps > 0 and 0 < args.delta < 1):
        raise ValidationFailure("--eps must be > 0 and --delta in (0, 1)")
    _prepare_out(args.out)
    coll = load_collection(dataset, fmt=args.format)
    eta = enumerate_vocabulary(args.l).size
    m = None
    if args.mode == "sampled":
        m = required_samples(args.eps, args.delta, eta)
        print(f"vocabulary size {eta}; sampling {m} walks per graph")
    matrices = feature_embeddings(coll, [args.l], epsilon=args.eps,
                                  delta=args.delta, seed=args.seed,
                                  mode=args.mode, n_jobs=args.threads)
    csv_path = os.path.join(args.out, f"embeddings_fb_l{args.l}.csv")
    write_embeddings_csv(matrices[args.l], csv_path)
    outputs = [csv_path]
    if args.json:
        json_path = os.path.join(args.out, f"embeddings_fb_l{args.l}.json")
        write_embeddings_json(matrices[args.l], args.l, args.mode, json_path)
        outputs.append(json_path)
    params = {"l": args.l, "mode": args.mode, "eps": args.eps,
              "delta": args.delta, "samples_per_graph": m,
              "vocabulary_size": eta, "threads": args.threads,
              "format": args.format}
    _write_manifest(args.out, "embed-fb", params, {"dataset": dataset},
                    outputs)
    print(f"wrote {len(coll)} embeddings to {csv_path}")


def cmd_embed_dd(args):
    dataset = _resolve_dataset(args.dataset)
    if args.walks_per_node < 2 * args.window + 1:
        raise ValidationFailure(
            f"--walks-per-node must be >= 2*window+1 = {2 * args.window + 1}")
    _prepare_out(args.out)
    coll = load_collection(dataset, fmt=args.format)
    cfg = TrainConfig(window=args.window, epochs=args.epochs,
                      iterations=args.iterations, batch_size=args.batch_size,
                      learning_rate=args.lr, negatives=args.negatives,
                      sampler=args.sampler, walk_dim=args.walk_dim,
                      graph_dim=args.graph_dim, seed=args.seed)
    matrix, result = datadriven_embeddings(coll, cfg, length=args.l,
                                           walks_per_node=args.walks_per_node,
                                           seed=args.seed)
    csv_path = os.path.join(args.out, "embeddings_dd.csv")
    ckpt_path = os.path.join(args.out, "model_dd.npz")
    write_embeddings_csv(matrix, csv_path)
    save_model(result.params, ckpt_path)
    outputs = [csv_path, ckpt_path]
    if args.json:
        json_path = os.path.join(args.out, "embeddings_dd.json")
        write_embeddings_json(matrix, args.l, "data-driven", json_path)
        outputs.append(json_path)
    params = {"l": args.l, "walks_per_node": args.walks_per_node,
              "window": args.window, "epochs": args.epochs,
              "iterations": args.iterations, "batch_size": args.batch_size,
              "learning_rate": args.lr, "negatives": args.negatives,
              "sampler": args.sampler, "walk_dim": args.walk_dim,
              "graph_dim": args.graph_dim, "seed": args.seed,
              "format": args.format}
    _write_manifest(args.out, "embed-dd", params, {"dataset": dataset},
                    outputs)
    if result.epoch_losses:
        print(f"final epoch loss {result.epoch_losses[-1]:.4f}")
    print(f"wrote {len(coll)} embeddings to {csv_path}")


def _parse_kernel_grid(args):
    specs = []
    kinds = args.kernels.split(",")
    for kind in kinds:
        kind = kind.strip()
        if kind == "rbf":
            specs.extend(KernelSpec("rbf", sigma=s) for s in args.sigmas)
        elif kind == "inner":
            specs.append(KernelSpec("inner"))
        elif kind in ("poly", "polynomial"):
            specs.append(KernelSpec("polynomial", c=args.poly_c,
                                    degree=args.poly_degree))
        else:
            raise ValidationFailure(f"unknown kernel {kind!r}")
    return tuple(specs)


def cmd_classify(args):
    for path in args.embeddings:
        if not os.path.isfile(path):
            raise ValidationFailure(f"embeddings file not found: {path}")
    if not os.path.isfile(args.labels):
        raise ValidationFailure(f"labels file not found: {args.labels}")
    kernel_grid = _parse_kernel_grid(args)
    if not args.c_grid:
        raise ValidationFailure("empty C grid")
    _prepare_out(args.out)
    with open(args.labels) as f:
        labels = np.array([int(line.strip()) for line in f if line.strip()])
    sets = {}
    for path in args.embeddings:
        name = os.path.splitext(os.path.basename(path))[0]
        sets[name] = read_embeddings_csv(path)
    cfg = EvalConfig(folds=args.folds, repeats=args.repeats,
                     c_grid=tuple(args.c_grid), kernel_grid=kernel_grid,
                     seed=args.seed, n_jobs=args.threads,
                     normalize=args.normalize)
    report = cross_validate(labels, sets, cfg)
    report_path = os.path.join(args.out, "report.json")
    with open(report_path, "w") as f:
        f.write(report.to_json())
    timing_path = os.path.join(args.out, "timings.json")
    with open(timing_path, "w") as f:
        json.dump(report.timings, f, sort_keys=True)
        f.write("\n")
    params = {"folds": args.folds, "repeats": args.repeats,
              "c_grid": list(args.c_grid),
              "kernels": [s.label for s in kernel_grid],
              "seed": args.seed, "threads": args.threads,
              "normalize": args.normalize}
    _write_manifest(args.out, "classify", params,
                    {"embeddings": list(args.embeddings),
                     "labels": args.labels},
                    [report_path, timing_path])
    print(f"accuracy {100 * report.mean_accuracy:.2f}% "
          f"+- {100 * report.std_accuracy:.2f}%")


def cmd_scalability(args):
    if any(n < 1 for n in args.sizes):
        raise ValidationFailure("--sizes must be positive")
    _prepare_out(args.out)
    cfg = TrainConfig(window=args.window, epochs=1,
                      iterations=args.iterations, batch_size=args.batch_size,
                      negatives=args.negatives, walk_dim=args.dims,
                      graph_dim=args.dims, seed=args.seed)
    rows = scalability_run(args.sizes, args.mu, args.reps, cfg,
                           walks_per_node=args.walks_per_node,
                           length=args.l, seed=args.seed)
    csv_path = os.path.join(args.out, "timings.csv")
    plot_path = os.path.join(args.out, "plot_data.json")
    write_timing_csv(rows, csv_path)
    write_plot_data(rows, plot_path)
    params = {"sizes": list(args.sizes), "mu": list(args.mu),
              "reps": args.reps, "iterations": args.iterations,
              "batch_size": args.batch_size, "dims": args.dims,
              "walks_per_node": args.walks_per_node, "l": args.l,
              "seed": args.seed}
    _write_manifest(args.out, "scalability", params, {},
                    [csv_path, plot_path])
    for row in rows:
        print(f"n={row.n} mu={row.mu:g}: {row.mean_seconds:.2f}s "
              f"+- {row.std_seconds:.2f}s")


def cmd_enumerate(args):
    if args.l < 1:
        raise ValidationFailure("--l must be >= 1")
    vocab = enumerate_vocabulary(args.l)
    out_dir = os.path.dirname(os.path.abspath(args.out))
    os.makedirs(out_dir, exist_ok=True)
    write_vocabulary(vocab, args.out)
    _write_manifest(out_dir, "enumerate", {"l": args.l}, {},
                    [os.path.abspath(args.out)])
    print(f"wrote {vocab.size} walks to {args.out}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="anonwalks",
        description="Whole-graph embeddings from anonymous walks, with "
                    "kernel SVM classification")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1,
                       help="1 guarantees bit-reproducible outputs")
        p.add_argument("--out", required=True, help="output directory")

    def add_dataset(p):
        p.add_argument("--dataset", required=True,
                       help=f"dataset directory (or name under ${DATA_DIR_ENV})")
        p.add_argument("--format", default="benchmark-collection",
                       choices=["benchmark-collection", "edge-list-dir"])

    p = sub.add_parser("embed-fb", help="feature-based embeddings")
    add_dataset(p)
    p.add_argument("--l", type=int, default=10, help="walk length in edges")
    p.add_argument("--mode", default="sampled", choices=["sampled", "exact"])
    p.add_argument("--eps", type=float, default=0.1, help="L1 accuracy")
    p.add_argument("--delta", type=float, default=0.05,
                   help="failure probability")
    p.add_argument("--json", action="store_true", help="also write JSON")
    add_common(p)
    p.set_defaults(func=cmd_embed_fb)

    p = sub.add_parser("embed-dd", help="data-driven embeddings")
    add_dataset(p)
    p.add_argument("--l", type=int, default=10)
    p.add_argument("--walks-per-node", "-T", type=int, default=100)
    p.add_argument("--window", type=int, default=4)
    p.add_argument("--batch-size", type=int, default=100)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--iterations", type=int, default=100)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--negatives", type=int, default=5)
    p.add_argument("--sampler", default="uniform",
                   choices=["uniform", "loguniform"])
    p.add_argument("--walk-dim", type=int, default=128)
    p.add_argument("--graph-dim", type=int, default=128)
    p.add_argument("--json", action="store_true")
    add_common(p)
    p.set_defaults(func=cmd_embed_dd)

    p = sub.add_parser("classify", help="cross-validated SVM accuracy")
    p.add_argument("--embeddings", nargs="+", required=True,
                   help="embedding CSVs; several files become per-fold "
                        "selectable settings")
    p.add_argument("--labels", required=True, help="one class id per line")
    p.add_argument("--kernels", default="rbf",
                   help="comma list of rbf,inner,poly")
    p.add_argument("--sigmas", type=float, nargs="+",
                   default=rbf_sigma_grid())
    p.add_argument("--poly-c", type=float, default=0.0)
    p.add_argument("--poly-degree", type=int, default=2)
    p.add_argument("--c-grid", type=float, nargs="+",
                   default=list(DEFAULT_C_GRID))
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--normalize", action="store_true",
                   help="L2-normalize embeddings before the kernel")
    add_common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("scalability", help="random-graph timing experiment")
    p.add_argument("--sizes", type=int, nargs="+",
                   default=[10, 100, 1000, 10000])
    p.add_argument("--mu", type=float, nargs="+", default=[2, 3, 4, 5],
                   help="expected degree n*p")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--l", type=int, default=10)
    p.add_argument("--walks-per-node", type=int, default=100)
    p.add_argument("--iterations", type=int, default=100)
    p.add_argument("--batch-size", type=int, default=100)
    p.add_argument("--window", type=int, default=4)
    p.add_argument("--negatives", type=int, default=5)
    p.add_argument("--dims", type=int, default=128)
    add_common(p)
    p.set_defaults(func=cmd_scalability)

    p = sub.add_parser("enumerate", help="dump the walk vocabulary")
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--out", required=True, help="output text file")
    p.set_defaults(func=cmd_enumerate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ValidationFailure, GraphFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (CostGuardError, SmoConvergenceError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return 0


if __name__ == "__main__":
    sys.exit(main())
