"""Feature-based whole-graph embeddings over the anonymous-walk vocabulary.

The embedding of a graph is the probability vector of observing each
anonymous walk pattern when a walk of fixed length starts at a uniformly
random (startable) node. It can be computed exactly by enumerating all
weighted walks, or approximated by sampling with an L1-accuracy guarantee.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ._sampling import count_sampled_walks
from .walks import DeadEndError, RandomWalkGraph, WalkVocabulary


class CostGuardError(RuntimeError):
    """Exact enumeration would exceed the configured walk budget."""


def required_samples(epsilon: float, delta: float, eta: int) -> int:
    """Number of i.i.d. walks so that the empirical pattern distribution is
    within ``epsilon`` of the true one in L1 with probability >= 1 - delta.

    Evaluates ceil((2/eps^2) * (ln(2^eta - 2) - ln(delta))); the first log is
    computed as eta*ln(2) + ln(1 - 2^(1-eta)) to stay finite for large eta.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    if not (0 < delta < 1):
        raise ValueError("delta must be in (0, 1)")
    if eta < 2:
        raise ValueError("eta must be >= 2")
    log_term = eta * math.log(2.0) + math.log1p(-(2.0 ** (1 - eta)))
    return math.ceil(2.0 / (epsilon * epsilon) * (log_term - math.log(delta)))


@dataclass(frozen=True)
class SamplingPlan:
    """Sample budget for an L1 guarantee: P(||emp - true||_1 >= eps) <= delta."""

    epsilon: float
    delta: float
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if not (0 < self.delta < 1):
            raise ValueError("delta must be in (0, 1)")

    @classmethod
    def for_accuracy(cls, epsilon, delta, eta):
        return cls(epsilon, delta, required_samples(epsilon, delta, eta))


@dataclass
class FeatureEmbedding:
    """A probability vector over the anonymous-walk vocabulary of one length.

    Sampled embeddings keep their integer counts so exactness statements
    (counts sum to m) survive the float division.
    """

    values: np.ndarray
    length: int
    mode: str  # "exact" | "sampled"
    m: int | None = None
    seed: int | None = None
    counts: np.ndarray | None = None

    @property
    def size(self) -> int:
        return int(self.values.size)


def estimated_walk_count(graph, length: int) -> float:
    """Upper bound n * (d_in_max * d_out_max)^(l/2) on the number of walks."""
    if graph.arc_count == 0:
        return 0.0
    d_out = np.bincount(graph.sources, minlength=graph.node_count).max()
    d_in = np.bincount(graph.targets, minlength=graph.node_count).max()
    return float(graph.node_count) * float(d_in * d_out) ** (length / 2.0)


def exact_embedding(rwg: RandomWalkGraph, vocab: WalkVocabulary,
                    graph=None, budget: float = 1e8) -> FeatureEmbedding:
    """Exact pattern distribution by depth-first walk enumeration.

    Every walk contributes the product of its transition probabilities; the
    per-start distributions are averaged over the startable nodes. ``graph``
    is only needed for the cost guard; pass None to skip it.
    """
    if graph is not None:
        est = estimated_walk_count(graph, vocab.length)
        if est > budget:
            raise CostGuardError(
                f"estimated {est:.3g} walks exceeds budget {budget:.3g}; "
                f"use sampled mode instead")
    if rwg.n_startable == 0:
        raise ValueError("graph has no startable node")
    parts = {}
    for u in rwg.start_nodes:
        _collect_walk_probs(rwg, vocab, int(u), parts)
    vec = np.zeros(vocab.size)
    for wid, contribs in parts.items():
        vec[wid] = math.fsum(contribs)
    vec /= rwg.n_startable
    return FeatureEmbedding(vec, vocab.length, "exact")


def _collect_walk_probs(rwg, vocab, start, parts):
    """Append every walk probability from ``start`` to parts[pattern index].

    Per-component totals are taken with exact summation afterwards, so the
    result cannot depend on enumeration order (and hence node labels).
    """
    length = vocab.length
    trans = vocab.trans
    offsets, neighbors, probs = rwg.offsets, rwg.neighbors, rwg.probs
    seen = [start]

    def walk(node, depth, wid, prob):
        if depth == length:
            parts.setdefault(wid, []).append(prob)
            return
        lo, hi = offsets[node], offsets[node + 1]
        if lo == hi:
            raise DeadEndError(node)
        for k in range(lo, hi):
            v = int(neighbors[k])
            try:
                state = seen.index(v) + 1
                pushed = False
            except ValueError:
                seen.append(v)
                state = len(seen)
                pushed = True
            nxt = int(trans[depth][wid, state - 1])
            walk(v, depth + 1, nxt, prob * probs[k])
            if pushed:
                seen.pop()

    walk(start, 0, 0, 1.0)


def _node_distribution(rwg, vocab, start) -> np.ndarray:
    """Distribution of anonymous walks of vocab.length edges starting at
    ``start``; components sum to 1 unless a dead end is reachable."""
    parts = {}
    _collect_walk_probs(rwg, vocab, start, parts)
    vec = np.zeros(vocab.size)
    for wid, contribs in parts.items():
        vec[wid] = math.fsum(contribs)
    return vec


def sampled_embedding(rwg: RandomWalkGraph, vocab: WalkVocabulary,
                      plan: SamplingPlan, seed: int) -> FeatureEmbedding:
    """Empirical pattern distribution from ``plan.m`` sampled walks.

    Each walk starts at a uniformly random startable node and follows the
    alias tables. Deterministic for a fixed seed; a run with larger m
    extends (rather than replaces) the walks of a smaller run.
    """
    if rwg.n_startable == 0:
        raise ValueError("graph has no startable node")
    counts = count_sampled_walks(rwg, {vocab.length: vocab},
                                 {vocab.length: plan.m}, seed)[vocab.length]
    return FeatureEmbedding(counts / plan.m, vocab.length, "sampled",
                            m=plan.m, seed=seed, counts=counts)


def sampled_embeddings_multi(rwg: RandomWalkGraph, vocabs: dict,
                             plans: dict, seed: int) -> dict:
    """Sampled embeddings for several lengths from one pass of walks.

    Walks are drawn at the longest requested length; the length-l embedding
    uses the first plans[l].m walk prefixes, which follow the same law as
    fresh length-l walks. Equivalent to calling sampled_embedding per length
    with the same seed, at roughly the cost of the longest length alone.
    """
    if rwg.n_startable == 0:
        raise ValueError("graph has no startable node")
    limits = {l: plans[l].m for l in vocabs}
    counts = count_sampled_walks(rwg, vocabs, limits, seed)
    return {l: FeatureEmbedding(counts[l] / plans[l].m, l, "sampled",
                                m=plans[l].m, seed=seed, counts=counts[l])
            for l in vocabs}


def l1_distance(p: FeatureEmbedding, q: FeatureEmbedding) -> float:
    if p.length != q.length or p.size != q.size:
        raise ValueError("embeddings use different vocabularies")
    return float(np.abs(p.values - q.values).sum())


def write_embeddings_csv(matrix, path) -> None:
    """Header row of walk indices, then one row of values per graph."""
    matrix = np.atleast_2d(np.asarray(matrix))
    with open(path, "w") as f:
        f.write(",".join(str(i) for i in range(matrix.shape[1])) + "\n")
        for row in matrix:
            f.write(",".join(repr(float(x)) for x in row) + "\n")


def read_embeddings_csv(path) -> np.ndarray:
    with open(path) as f:
        header = f.readline()
        dim = len(header.strip().split(","))
    mat = np.atleast_2d(np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.float64))
    if mat.shape[1] != dim:
        raise ValueError(f"{path}: inconsistent embedding rows")
    return mat


def write_embeddings_json(matrix, length, mode, path) -> None:
    matrix = np.atleast_2d(np.asarray(matrix))
    records = [{"graph_id": i, "l": int(length), "mode": mode,
                "values": [float(x) for x in row]}
               for i, row in enumerate(matrix)]
    with open(path, "w") as f:
        json.dump(records, f)
        f.write("\n")
