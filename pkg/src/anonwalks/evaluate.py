"""Graph-classification evaluation: repeated stratified k-fold
cross-validation with per-fold hyperparameter selection, and the
random-graph scalability experiment."""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .graphs import generate_erdos_renyi
from .kernels import default_kernel_grid, gram
from .svm import svm_predict, svm_train
from .training import TrainConfig, build_corpus, train
from .walks import build_random_walk_graph, enumerate_vocabulary

DEFAULT_C_GRID = (0.001, 0.01, 0.1, 1.0, 10.0)


@dataclass(frozen=True)
class EvalConfig:
    folds: int = 10
    repeats: int = 10
    c_grid: tuple = DEFAULT_C_GRID
    kernel_grid: tuple = None
    seed: int = 0
    n_jobs: int = 1
    normalize: bool = False

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if self.repeats < 1 or not self.c_grid:
            raise ValueError("repeats and c_grid must be nonempty")
        if self.kernel_grid is None:
            object.__setattr__(self, "kernel_grid", tuple(default_kernel_grid()))
        if not self.kernel_grid:
            raise ValueError("kernel grid must be nonempty")


@dataclass
class FoldRecord:
    repeat: int
    fold: int
    accuracy: float
    embedding: str
    kernel: str
    C: float

    def to_dict(self):
        return {"repeat": self.repeat, "fold": self.fold,
                "accuracy": self.accuracy, "embedding": self.embedding,
                "kernel": self.kernel, "C": self.C}


@dataclass
class EvalReport:
    records: list
    mean_accuracy: float
    std_accuracy: float
    config: dict
    timings: dict = field(default_factory=dict)

    def to_json(self) -> str:
        """Deterministic report body; wall-clock timings stay separate."""
        payload = {"config": self.config,
                   "mean_accuracy": self.mean_accuracy,
                   "std_accuracy": self.std_accuracy,
                   "folds": [r.to_dict() for r in self.records]}
        return json.dumps(payload, sort_keys=True, indent=1) + "\n"


def stratified_folds(labels, folds, rng):
    """Shuffled round-robin assignment: per-class fold counts differ by <= 1."""
    labels = np.asarray(labels)
    assignment = np.empty(labels.size, dtype=np.int64)
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        if members.size < folds:
            raise ValueError(
                f"class {c} has {members.size} graphs, fewer than {folds} "
                f"folds; use fewer folds")
        members = members[rng.permutation(members.size)]
        assignment[members] = np.arange(members.size) % folds
    return [np.flatnonzero(assignment == f) for f in range(folds)]


def _accuracy(model, k_full, train_idx, eval_idx, labels):
    pred = svm_predict(model, k_full[np.ix_(eval_idx, train_idx)])
    return float(np.mean(pred == labels[eval_idx]))


def _eval_fold(grams, labels, fold_sets, repeat, f, cfg):
    """Select hyperparameters on one held-out training fold, then retrain."""
    folds = len(fold_sets)
    test_idx = fold_sets[f]
    val_f = (f + 1) % folds
    val_idx = fold_sets[val_f]
    sel_idx = np.concatenate([fold_sets[g] for g in range(folds)
                              if g not in (f, val_f)])
    best = None
    for set_name, specs in grams.items():
        for spec_label, k_full in specs.items():
            k_sel = k_full[np.ix_(sel_idx, sel_idx)]
            for c in cfg.c_grid:
                model = svm_train(k_sel, labels[sel_idx], c)
                acc = _accuracy(model, k_full, sel_idx, val_idx, labels)
                if best is None or acc > best[0]:
                    best = (acc, set_name, spec_label, c)
    _, set_name, spec_label, c = best
    k_full = grams[set_name][spec_label]
    train_idx = np.concatenate([fold_sets[g] for g in range(folds) if g != f])
    model = svm_train(k_full[np.ix_(train_idx, train_idx)], labels[train_idx], c)
    acc = _accuracy(model, k_full, train_idx, test_idx, labels)
    return FoldRecord(repeat, f, acc, set_name, spec_label, c)


def cross_validate(labels, embedding_sets, cfg: EvalConfig) -> EvalReport:
    """Repeated stratified CV over embeddings computed without labels.

    ``embedding_sets`` maps a setting name (e.g. one walk length) to an
    (n_graphs, dim) matrix; the setting is selected per fold together with
    the kernel and C on a validation fold carved from the training folds.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if isinstance(embedding_sets, np.ndarray):
        embedding_sets = {"default": embedding_sets}
    t0 = time.perf_counter()
    grams = {}
    for name, emb in embedding_sets.items():
        if emb.shape[0] != labels.size:
            raise ValueError(f"embedding set {name!r} has {emb.shape[0]} rows "
                             f"for {labels.size} labels")
        grams[name] = {spec.label: gram(emb, spec, fingerprint={"set": name},
                                        normalize=cfg.normalize).values
                       for spec in cfg.kernel_grid}
    t_gram = time.perf_counter() - t0

    jobs = []
    for repeat in range(cfg.repeats):
        rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, repeat)))
        fold_sets = stratified_folds(labels, cfg.folds, rng)
        for f in range(cfg.folds):
            jobs.append((repeat, f, fold_sets))

    t0 = time.perf_counter()
    if cfg.n_jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.n_jobs) as pool:
            records = list(pool.map(
                lambda j: _eval_fold(grams, labels, j[2], j[0], j[1], cfg), jobs))
    else:
        records = [_eval_fold(grams, labels, fs, r, f, cfg)
                   for r, f, fs in jobs]
    t_cv = time.perf_counter() - t0

    accs = np.array([r.accuracy for r in records])
    config = {"folds": cfg.folds, "repeats": cfg.repeats,
              "c_grid": list(cfg.c_grid),
              "kernels": [s.label for s in cfg.kernel_grid],
              "embedding_sets": sorted(embedding_sets),
              "seed": cfg.seed, "normalize": cfg.normalize}
    return EvalReport(records, float(accs.mean()), float(accs.std()),
                      config, {"gram_seconds": t_gram, "cv_seconds": t_cv})


@dataclass
class TimingRow:
    n: int
    mu: float
    mean_seconds: float
    std_seconds: float
    times: list

    def to_csv_row(self):
        return f"{self.n},{self.mu:g},{self.mean_seconds:.6f},{self.std_seconds:.6f}"


def scalability_run(sizes, mus, reps, train_cfg: TrainConfig,
                    walks_per_node: int = 100, length: int = 10,
                    seed: int = 0) -> list[TimingRow]:
    """Time data-driven embedding end to end on G(n, mu/n) graphs.

    The clock covers transition-table construction, corpus sampling and
    training; graph generation is excluded.
    """
    vocab = enumerate_vocabulary(length)
    rows = []
    for n in sizes:
        if n < 1:
            raise ValueError("sizes must be positive")
        for mu in mus:
            p = min(mu / n, 1.0)
            times = []
            for rep in range(reps):
                gseed = np.random.SeedSequence((seed, n, int(mu * 1000), rep))
                graph = generate_erdos_renyi(n, p, gseed.generate_state(1)[0])
                t0 = time.perf_counter()
                rwg = build_random_walk_graph(graph)
                if rwg.n_startable == 0:
                    times.append(0.0)
                    continue
                corpus = build_corpus(rwg, vocab, walks_per_node,
                                      gseed.generate_state(2)[1])
                train([corpus], train_cfg)
                times.append(time.perf_counter() - t0)
            arr = np.array(times)
            rows.append(TimingRow(int(n), float(mu), float(arr.mean()),
                                  float(arr.std()), [float(t) for t in arr]))
    return rows


def write_timing_csv(rows, path) -> None:
    with open(path, "w") as f:
        f.write("n,mu,mean_seconds,std_seconds\n")
        for row in rows:
            f.write(row.to_csv_row() + "\n")


def write_plot_data(rows, path) -> None:
    """Per-mu series of (log10 n, mean seconds) for external plotting."""
    series = {}
    for row in rows:
        series.setdefault(row.mu, []).append(
            {"n": row.n, "log10_n": float(np.log10(row.n)),
             "mean_seconds": row.mean_seconds})
    payload = [{"mu": mu, "points": sorted(pts, key=lambda p: p["n"])}
               for mu, pts in sorted(series.items())]
    with open(path, "w") as f:
        json.dump(payload, f, sort_keys=True, indent=1)
        f.write("\n")
