"""Data-driven whole-graph embeddings trained on co-occurring anonymous walks.

Walks sampled from the same start node form a "sentence"; the model predicts
a target walk id from the averaged vectors of its context walks concatenated
with a per-graph vector. Training the shared walk/output weights jointly over
all graphs leaves each graph's vector as its embedding. No labels are used.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._sampling import sample_walk_ids

CHECKPOINT_VERSION = 1


class NonFiniteParameterError(RuntimeError):
    def __init__(self, tensor):
        super().__init__(f"non-finite values in parameter tensor {tensor!r}")
        self.tensor = tensor


class DivergenceError(RuntimeError):
    def __init__(self, epoch, iteration, loss):
        super().__init__(
            f"training diverged at epoch {epoch}, iteration {iteration}: "
            f"loss={loss!r}")
        self.epoch = epoch
        self.iteration = iteration


@dataclass(frozen=True)
class TrainConfig:
    window: int = 4          # context half-width; 2*window context walks
    epochs: int = 100
    iterations: int = 100    # batch steps per epoch
    batch_size: int = 100
    learning_rate: float = 0.1
    final_learning_rate: float = 1e-4
    negatives: int = 5       # sampled-softmax candidates per example
    sampler: str = "uniform"  # candidate law: uniform | loguniform
    softmax: str = "sampled"  # sampled | full
    walk_dim: int = 128      # embedding size of a walk
    graph_dim: int = 128     # embedding size of a graph
    seed: int = 0

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.sampler not in ("uniform", "loguniform"):
            raise ValueError(f"unknown sampler {self.sampler!r}")
        if self.softmax not in ("sampled", "full"):
            raise ValueError(f"unknown softmax mode {self.softmax!r}")


@dataclass
class Corpus:
    """Per-node sequences of walk ids for one graph.

    ``ids[i, t]`` is the vocabulary id of the t-th walk sampled from the
    i-th startable node; every row has the same number of walks.
    """

    length: int
    vocab_size: int
    ids: np.ndarray

    @property
    def walks_per_node(self) -> int:
        return int(self.ids.shape[1])

    @property
    def n_sequences(self) -> int:
        return int(self.ids.shape[0])


def build_corpus(rwg, vocab, walks_per_node: int, seed: int) -> Corpus:
    """Sample ``walks_per_node`` anonymous walks from every startable node."""
    if walks_per_node < 1:
        raise ValueError("walks_per_node must be >= 1")
    if rwg.n_startable == 0:
        raise ValueError("graph has no startable node")
    starts = np.repeat(rwg.start_nodes, walks_per_node)
    ids = sample_walk_ids(rwg, vocab, starts, seed)
    return Corpus(vocab.length, vocab.size,
                  ids.reshape(rwg.n_startable, walks_per_node))


@dataclass
class ModelParams:
    """Trainable tensors: walk vectors W, per-graph vectors D, output
    weights U and biases b over the vocabulary."""

    W: np.ndarray  # (eta, walk_dim)
    D: np.ndarray  # (n_graphs, graph_dim)
    U: np.ndarray  # (eta, walk_dim + graph_dim)
    b: np.ndarray  # (eta,)
    length: int

    @classmethod
    def initialize(cls, eta, n_graphs, walk_dim, graph_dim, length, seed):
        """W, D uniform in +-0.5/dim; U, b zero so the initial full-softmax
        loss is exactly ln(eta)."""
        rng = np.random.default_rng(seed)
        w = rng.uniform(-0.5 / walk_dim, 0.5 / walk_dim, size=(eta, walk_dim))
        d = rng.uniform(-0.5 / graph_dim, 0.5 / graph_dim,
                        size=(n_graphs, graph_dim))
        return cls(w, d, np.zeros((eta, walk_dim + graph_dim)), np.zeros(eta),
                   length)

    @property
    def vocab_size(self) -> int:
        return int(self.W.shape[0])

    @property
    def walk_dim(self) -> int:
        return int(self.W.shape[1])

    @property
    def graph_dim(self) -> int:
        return int(self.D.shape[1])

    def copy(self) -> "ModelParams":
        return ModelParams(self.W.copy(), self.D.copy(), self.U.copy(),
                           self.b.copy(), self.length)


@dataclass
class Gradients:
    """Sparse batch gradients: only the listed rows are touched."""

    w_rows: np.ndarray
    w_grad: np.ndarray
    d_rows: np.ndarray
    d_grad: np.ndarray
    u_rows: np.ndarray
    u_grad: np.ndarray
    b_grad: np.ndarray  # aligned with u_rows


def _as_batch_arrays(batch):
    """Normalize a list of (graph id, context ids, target id) to arrays."""
    if isinstance(batch, tuple) and len(batch) == 3:
        g, ctx, tgt = batch
        return (np.asarray(g, dtype=np.int64), np.asarray(ctx, dtype=np.int64),
                np.asarray(tgt, dtype=np.int64))
    g = np.array([e[0] for e in batch], dtype=np.int64)
    ctx = np.array([list(e[1]) for e in batch], dtype=np.int64)
    tgt = np.array([e[2] for e in batch], dtype=np.int64)
    return g, ctx, tgt


def _check_finite(params, ctx, graph_ids, u_rows=None):
    if not np.all(np.isfinite(params.W[np.unique(ctx)])):
        raise NonFiniteParameterError("W")
    if not np.all(np.isfinite(params.D[np.unique(graph_ids)])):
        raise NonFiniteParameterError("D")
    rows = slice(None) if u_rows is None else np.unique(u_rows)
    if not np.all(np.isfinite(params.U[rows])):
        raise NonFiniteParameterError("U")
    if not np.all(np.isfinite(params.b[rows])):
        raise NonFiniteParameterError("b")


def _log_uniform_probs(ids, eta):
    """Marginal law p(c) = ln((c+2)/(c+1)) / ln(eta+1), c = 0..eta-1."""
    c = ids.astype(np.float64)
    return np.log((c + 2.0) / (c + 1.0)) / np.log(eta + 1.0)


def _draw_candidates(targets, eta, k, sampler, rng):
    """k distinct candidate classes per example, never equal to the target.

    Rejection sampling against the sampler's marginal law; deterministic for
    a given generator state.
    """
    if k > eta - 1:
        raise ValueError("candidate count must be <= vocabulary size - 1")
    batch = targets.size
    out = np.empty((batch, k), dtype=np.int64)
    log_eta1 = np.log(eta + 1.0)
    for i in range(batch):
        chosen = {int(targets[i])}
        filled = 0
        while filled < k:
            want = k - filled
            if sampler == "uniform":
                props = rng.integers(0, eta, size=2 * want + 4)
            else:
                u = rng.random(2 * want + 4)
                props = np.floor(np.exp(u * log_eta1)).astype(np.int64) - 1
                np.clip(props, 0, eta - 1, out=props)
            for p in props:
                p = int(p)
                if p not in chosen:
                    chosen.add(p)
                    out[i, filled] = p
                    filled += 1
                    if filled == k:
                        break
    return out


def loss_and_gradients(params: ModelParams, batch, mode: str = "full",
                       negatives: int = 5, sampler: str = "uniform",
                       rng=None):
    """Mean prediction loss of a batch and its exact gradients.

    The hidden vector is the mean of the context walk vectors concatenated
    with the graph vector. ``full`` scores all vocabulary entries; ``sampled``
    scores the target plus ``negatives`` drawn candidates, with logits
    corrected by the log expected count of each class under the candidate
    law, the standard importance correction for sampled softmax.
    """
    graph_ids, ctx, targets = _as_batch_arrays(batch)
    if ctx.ndim != 2:
        raise ValueError("context ids must be (batch, 2*window)")
    batch_n, n_ctx = ctx.shape
    eta = params.vocab_size
    d_a = params.walk_dim
    _check_finite(params, ctx, graph_ids)

    ctx_vecs = params.W[ctx]                     # (B, 2w, d_a)
    h = np.concatenate([ctx_vecs.mean(axis=1), params.D[graph_ids]], axis=1)

    if mode == "full":
        scores = h @ params.U.T + params.b       # (B, eta)
        shift = scores.max(axis=1, keepdims=True)
        expd = np.exp(scores - shift)
        denom = expd.sum(axis=1, keepdims=True)
        log_probs = scores - shift - np.log(denom)
        loss = float(-log_probs[np.arange(batch_n), targets].mean())
        delta = expd / denom                     # softmax probabilities
        delta[np.arange(batch_n), targets] -= 1.0
        delta /= batch_n
        u_rows = np.arange(eta)
        u_grad = delta.T @ h
        b_grad = delta.sum(axis=0)
        dh = delta @ params.U                    # (B, d)
    elif mode == "sampled":
        if rng is None:
            raise ValueError("sampled mode needs an rng")
        cand = _draw_candidates(targets, eta, negatives, sampler, rng)
        cols = np.concatenate([targets[:, None], cand], axis=1)  # (B, k+1)
        _check_finite(params, ctx, graph_ids, u_rows=cols.ravel())
        if sampler == "uniform":
            q = np.full(cols.shape, negatives / eta)
        else:
            q = negatives * _log_uniform_probs(cols, eta)
        u_sub = params.U[cols]                   # (B, k+1, d)
        scores = np.einsum("bkd,bd->bk", u_sub, h) + params.b[cols] - np.log(q)
        shift = scores.max(axis=1, keepdims=True)
        expd = np.exp(scores - shift)
        denom = expd.sum(axis=1, keepdims=True)
        loss = float(-(scores[:, 0] - shift[:, 0] - np.log(denom[:, 0])).mean())
        delta = expd / denom
        delta[:, 0] -= 1.0
        delta /= batch_n
        u_rows, inv = np.unique(cols.ravel(), return_inverse=True)
        u_grad = np.zeros((u_rows.size, h.shape[1]))
        np.add.at(u_grad, inv, (delta[:, :, None] * h[:, None, :]).reshape(-1, h.shape[1]))
        b_grad = np.zeros(u_rows.size)
        np.add.at(b_grad, inv, delta.ravel())
        dh = np.einsum("bk,bkd->bd", delta, u_sub)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    w_rows, w_inv = np.unique(ctx.ravel(), return_inverse=True)
    w_grad = np.zeros((w_rows.size, d_a))
    dh_ctx = np.repeat(dh[:, :d_a] / n_ctx, n_ctx, axis=0)
    np.add.at(w_grad, w_inv, dh_ctx)
    d_rows, d_inv = np.unique(graph_ids, return_inverse=True)
    d_grad = np.zeros((d_rows.size, params.graph_dim))
    np.add.at(d_grad, d_inv, dh[:, d_a:])

    return loss, Gradients(w_rows, w_grad, d_rows, d_grad,
                           np.asarray(u_rows), u_grad, b_grad)


def _apply_sgd(params, grads, lr, update_shared=True):
    if update_shared:
        params.W[grads.w_rows] -= lr * grads.w_grad
        params.U[grads.u_rows] -= lr * grads.u_grad
        params.b[grads.u_rows] -= lr * grads.b_grad
    params.D[grads.d_rows] -= lr * grads.d_grad


@dataclass
class TrainResult:
    params: ModelParams
    epoch_losses: list = field(default_factory=list)


def _window_pool(corpora):
    """Stack per-graph sequences into one pool with graph indices."""
    t = corpora[0].walks_per_node
    eta = corpora[0].vocab_size
    length = corpora[0].length
    for c in corpora:
        if c.walks_per_node != t:
            raise ValueError("all corpora must use the same walks_per_node")
        if c.vocab_size != eta or c.length != length:
            raise ValueError("all corpora must share one vocabulary")
    ids = np.concatenate([c.ids for c in corpora], axis=0)
    seq_graph = np.concatenate([np.full(c.n_sequences, gi, dtype=np.int64)
                                for gi, c in enumerate(corpora)])
    return ids, seq_graph


def _sample_batch(ids, seq_graph, window, batch_size, rng):
    t = ids.shape[1]
    seq = rng.integers(0, ids.shape[0], size=batch_size)
    pos = rng.integers(window, t - window, size=batch_size)
    offs = np.concatenate([np.arange(-window, 0), np.arange(1, window + 1)])
    rows = ids[seq]
    ctx = np.take_along_axis(rows, pos[:, None] + offs[None, :], axis=1)
    targets = rows[np.arange(batch_size), pos]
    return seq_graph[seq], ctx.astype(np.int64), targets.astype(np.int64)


def _run_sgd(params, corpora, cfg, update_shared=True):
    ids, seq_graph = _window_pool(corpora)
    t = ids.shape[1]
    if t < 2 * cfg.window + 1:
        raise ValueError(
            f"walks_per_node={t} too small for window={cfg.window} "
            f"(need at least {2 * cfg.window + 1})")
    rng = np.random.default_rng(cfg.seed)
    total = max(cfg.epochs * cfg.iterations, 1)
    step = 0
    epoch_losses = []
    for epoch in range(cfg.epochs):
        losses = np.empty(cfg.iterations)
        for it in range(cfg.iterations):
            frac = step / (total - 1) if total > 1 else 0.0
            lr = cfg.learning_rate + frac * (cfg.final_learning_rate
                                             - cfg.learning_rate)
            batch = _sample_batch(ids, seq_graph, cfg.window,
                                  cfg.batch_size, rng)
            loss, grads = loss_and_gradients(
                params, batch, mode=cfg.softmax, negatives=cfg.negatives,
                sampler=cfg.sampler, rng=rng)
            if not np.isfinite(loss):
                raise DivergenceError(epoch, it, loss)
            _apply_sgd(params, grads, lr, update_shared=update_shared)
            losses[it] = loss
            step += 1
        epoch_losses.append(float(losses.mean()))
    return epoch_losses


def train(corpora: list, cfg: TrainConfig) -> TrainResult:
    """Joint SGD over all graphs: shared W, U, b; one D row per graph."""
    if not corpora:
        raise ValueError("no corpora given")
    params = ModelParams.initialize(corpora[0].vocab_size, len(corpora),
                                    cfg.walk_dim, cfg.graph_dim,
                                    corpora[0].length, cfg.seed)
    losses = _run_sgd(params, corpora, cfg)
    return TrainResult(params, losses)


def infer_embedding(params: ModelParams, corpus: Corpus, cfg: TrainConfig):
    """Graph vector for a new graph with W, U, b frozen.

    Runs the same SGD loop on a fresh single-row D; the shared tensors are
    reused, not copied, and stay bit-identical.
    """
    if corpus.vocab_size != params.vocab_size or corpus.length != params.length:
        raise ValueError("corpus vocabulary does not match the model")
    rng = np.random.default_rng(cfg.seed)
    d_row = rng.uniform(-0.5 / params.graph_dim, 0.5 / params.graph_dim,
                        size=(1, params.graph_dim))
    frozen = ModelParams(params.W, d_row, params.U, params.b, params.length)
    _run_sgd(frozen, [corpus], cfg, update_shared=False)
    return d_row[0]


def save_model(params: ModelParams, path) -> None:
    np.savez(path, version=CHECKPOINT_VERSION, length=params.length,
             eta=params.vocab_size, walk_dim=params.walk_dim,
             graph_dim=params.graph_dim, W=params.W, D=params.D,
             U=params.U, b=params.b)


def load_model(path, vocab=None) -> ModelParams:
    with np.load(path) as data:
        if int(data["version"]) != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {data['version']}")
        params = ModelParams(data["W"], data["D"], data["U"], data["b"],
                             int(data["length"]))
        eta = int(data["eta"])
    if params.vocab_size != eta:
        raise ValueError("checkpoint tensor shapes disagree with metadata")
    if vocab is not None and (vocab.size != eta or vocab.length != params.length):
        raise ValueError(
            f"checkpoint was trained for a length-{params.length} vocabulary "
            f"of size {eta}, got length {vocab.length} size {vocab.size}")
    return params
