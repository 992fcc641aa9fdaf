"""End-to-end plumbing: collections -> embedding matrices.

Per-graph seeds are derived from a master seed and the graph index, so
results do not depend on worker count or evaluation order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .features import (SamplingPlan, exact_embedding, sampled_embeddings_multi)
from .training import TrainConfig, build_corpus, train
from .walks import build_random_walk_graph, enumerate_vocabulary


def graph_seed(master_seed: int, graph_index: int) -> int:
    """Stable per-graph stream seed."""
    return int(np.random.SeedSequence((master_seed, graph_index))
               .generate_state(1, dtype=np.uint64)[0])


def feature_embeddings(collection, lengths, epsilon: float = 0.1,
                       delta: float = 0.05, seed: int = 0,
                       mode: str = "sampled", n_jobs: int = 1,
                       budget: float = 1e8) -> dict:
    """Sampled (or exact) embedding matrices, one per requested length.

    Sampled mode draws every graph's walks in a single pass at the longest
    length; the per-length sample counts follow the L1 bound for that
    length's vocabulary size.
    """
    lengths = sorted(set(int(l) for l in lengths))
    vocabs = {l: enumerate_vocabulary(l) for l in lengths}
    if mode == "sampled":
        plans = {l: SamplingPlan.for_accuracy(epsilon, delta, vocabs[l].size)
                 for l in lengths}
    matrices = {l: np.zeros((len(collection), vocabs[l].size)) for l in lengths}

    def one(gi):
        rwg = build_random_walk_graph(collection.graphs[gi])
        if mode == "sampled":
            embs = sampled_embeddings_multi(rwg, vocabs, plans,
                                            graph_seed(seed, gi))
        elif mode == "exact":
            embs = {l: exact_embedding(rwg, vocabs[l],
                                       graph=collection.graphs[gi],
                                       budget=budget)
                    for l in lengths}
        else:
            raise ValueError(f"unknown embedding mode {mode!r}")
        return gi, embs

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = pool.map(one, range(len(collection)))
    else:
        results = map(one, range(len(collection)))
    for gi, embs in results:
        for l in lengths:
            matrices[l][gi] = embs[l].values
    return matrices


def sample_counts_for(lengths, epsilon=0.1, delta=0.05):
    """The per-length walk budgets implied by the L1 bound."""
    out = {}
    for l in sorted(set(lengths)):
        eta = enumerate_vocabulary(l).size
        out[l] = SamplingPlan.for_accuracy(epsilon, delta, eta).m
    return out


def datadriven_embeddings(collection, cfg: TrainConfig, length: int = 10,
                          walks_per_node: int = 100, seed: int = 0):
    """Train graph vectors jointly over the collection; returns the
    (n_graphs, graph_dim) matrix and the full training result."""
    vocab = enumerate_vocabulary(length)
    corpora = []
    for gi, g in enumerate(collection.graphs):
        rwg = build_random_walk_graph(g)
        corpora.append(build_corpus(rwg, vocab, walks_per_node,
                                    graph_seed(seed, gi)))
    result = train(corpora, cfg)
    return result.params.D.copy(), result
