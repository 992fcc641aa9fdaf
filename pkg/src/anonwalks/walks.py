"""Random-walk machinery: transition tables, O(1) alias sampling, and the
anonymous-walk vocabulary.

An anonymous walk replaces every node of a walk by the rank of its first
occurrence, so ``(a, b, c, b, c)`` and ``(c, d, b, d, b)`` both become
``(1, 2, 3, 2, 3)``. The vocabulary of a given length enumerates every such
pattern once, in lexicographic order; because self-loops are stripped at
ingestion, patterns never repeat a state twice in a row.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_WALK_LENGTH = 16  # vocabulary size grows super-exponentially beyond this


class DeadEndError(RuntimeError):
    """A walk reached a node with no outgoing arcs (directed inputs only)."""

    def __init__(self, node):
        super().__init__(f"walk reached node {node} with out-degree 0")
        self.node = node


class RandomWalkGraph:
    """Per-node transition distributions with alias tables for O(1) sampling.

    The transition probability of arc (u, v) is the arc weight divided by the
    total outgoing weight of u. Nodes without outgoing arcs are marked
    non-startable instead of raising.
    """

    def __init__(self, graph):
        n = graph.node_count
        order = np.argsort(graph.sources, kind="stable")
        self.neighbors = graph.targets[order].astype(np.int32)
        w = graph.weights[order]
        counts = np.bincount(graph.sources, minlength=n)
        self.offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=self.offsets[1:])
        self.probs = np.empty_like(w)
        self.alias_prob = np.empty_like(w)
        self.alias_idx = np.zeros(w.size, dtype=np.int32)
        for u in range(n):
            lo, hi = self.offsets[u], self.offsets[u + 1]
            if hi > lo:
                # summing sorted weights makes each probability independent
                # of arc order, so node relabelings cannot perturb bits
                p = w[lo:hi] / np.sort(w[lo:hi]).sum()
                self.probs[lo:hi] = p
                ap, ai = _build_alias(p)
                self.alias_prob[lo:hi] = ap
                self.alias_idx[lo:hi] = ai
        self.startable = counts > 0
        self.start_nodes = np.flatnonzero(self.startable).astype(np.int32)
        self.node_count = n
        # acceptance thresholds scaled to uint32 range for the compiled sampler
        self.alias_accept_u32 = np.minimum(
            np.floor(self.alias_prob * 2.0 ** 32), 2.0 ** 32).astype(np.uint64)

    @property
    def n_startable(self) -> int:
        return int(self.start_nodes.size)

    def out_degree(self, u) -> int:
        return int(self.offsets[u + 1] - self.offsets[u])

    def transition_probs(self, u):
        """(neighbors, probabilities) of node u."""
        lo, hi = self.offsets[u], self.offsets[u + 1]
        return self.neighbors[lo:hi], self.probs[lo:hi]

    def alias_distribution(self, u):
        """Distribution implied by u's alias table, for verification.

        Slot j is drawn uniformly; it yields neighbor j with probability
        alias_prob[j] and neighbor alias_idx[j] otherwise.
        """
        lo, hi = self.offsets[u], self.offsets[u + 1]
        deg = hi - lo
        p = np.zeros(deg)
        for j in range(deg):
            p[j] += self.alias_prob[lo + j] / deg
            p[self.alias_idx[lo + j]] += (1.0 - self.alias_prob[lo + j]) / deg
        return p


def _build_alias(p):
    """Vose's alias method: tables reproducing the distribution p exactly."""
    k = p.size
    accept = np.zeros(k)
    alias = np.zeros(k, dtype=np.int32)
    scaled = p * k
    small = [i for i in range(k) if scaled[i] < 1.0]
    large = [i for i in range(k) if scaled[i] >= 1.0]
    while small and large:
        s = small.pop()
        l = large.pop()
        accept[s] = scaled[s]
        alias[s] = l
        scaled[l] = (scaled[l] + scaled[s]) - 1.0
        if scaled[l] < 1.0:
            small.append(l)
        else:
            large.append(l)
    for i in large:
        accept[i] = 1.0
    for i in small:  # numerical leftovers
        accept[i] = 1.0
    return accept, alias


def build_random_walk_graph(graph) -> RandomWalkGraph:
    return RandomWalkGraph(graph)


def sample_walk(rwg: RandomWalkGraph, start: int, length: int, rng) -> list[int]:
    """One random walk of ``length`` edges from ``start`` (length+1 nodes)."""
    if not rwg.startable[start]:
        raise DeadEndError(start)
    walk = [int(start)]
    cur = int(start)
    for _ in range(length):
        lo = rwg.offsets[cur]
        deg = int(rwg.offsets[cur + 1] - lo)
        if deg == 0:
            raise DeadEndError(cur)
        slot = int(rng.random() * deg)
        if slot >= deg:
            slot = deg - 1
        if rng.random() >= rwg.alias_prob[lo + slot]:
            slot = int(rwg.alias_idx[lo + slot])
        cur = int(rwg.neighbors[lo + slot])
        walk.append(cur)
    return walk


def anonymize(walk) -> tuple[int, ...]:
    """Map a node sequence to first-occurrence ranks, starting at 1."""
    if len(walk) == 0:
        raise ValueError("cannot anonymize an empty walk")
    ranks = {}
    out = []
    for v in walk:
        if v not in ranks:
            ranks[v] = len(ranks) + 1
        out.append(ranks[v])
    return tuple(out)


def is_valid_pattern(states) -> bool:
    """True iff ``states`` is a well-formed anonymous walk pattern."""
    if not states or states[0] != 1:
        return False
    mx = 0
    prev = None
    for s in states:
        if s < 1 or s > mx + 1 or s == prev:
            return False
        mx = max(mx, s)
        prev = s
    return True


@dataclass
class WalkVocabulary:
    """All anonymous walks of a fixed edge count, in lexicographic order.

    ``trans`` holds one transition table per step: entry ``trans[j][i, s-1]``
    is the index (at step j+1) of the walk obtained by extending the i-th
    walk of step j with state s. This lets samplers map node sequences to
    vocabulary indices in O(1) per step.
    """

    length: int
    walks: list[tuple[int, ...]]
    index: dict = field(repr=False)
    trans: list = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.walks)

    def index_of(self, walk_or_pattern) -> int:
        pattern = tuple(walk_or_pattern)
        if pattern not in self.index:
            pattern = anonymize(pattern)
        return self.index[pattern]

    def flat_trans(self):
        """Transition tables flattened for compiled kernels.

        Returns (flat, offsets, widths): table j occupies
        flat[offsets[j] : offsets[j] + size_j] with row width widths[j].
        """
        widths = np.array([t.shape[1] for t in self.trans], dtype=np.int64)
        offsets = np.zeros(len(self.trans), dtype=np.int64)
        for j in range(1, len(self.trans)):
            offsets[j] = offsets[j - 1] + self.trans[j - 1].size
        flat = np.concatenate([t.ravel() for t in self.trans])
        return flat, offsets, widths


def enumerate_vocabulary(length: int) -> WalkVocabulary:
    """Enumerate every anonymous walk with ``length`` edges.

    Walks have length+1 states; each state is at most one above the running
    maximum and never equal to its predecessor. Enumeration is level by
    level, which keeps lexicographic order and yields the per-step
    transition tables for free.
    """
    if length < 1 or length > MAX_WALK_LENGTH:
        raise ValueError(
            f"walk length must be in 1..{MAX_WALK_LENGTH}: enumeration cost grows "
            f"super-exponentially (it is already ~1e10 patterns at length 16)")
    level = [(1,)]
    maxima = [1]
    trans = []
    for j in range(length):
        width = j + 3  # states 1..j+2 can occur at the next position
        table = np.full((len(level), width), -1, dtype=np.int32)
        nxt = []
        nxt_maxima = []
        for wi, w in enumerate(level):
            mx = maxima[wi]
            last = w[-1]
            for s in range(1, mx + 2):
                if s == last:
                    continue
                table[wi, s - 1] = len(nxt)
                nxt.append(w + (s,))
                nxt_maxima.append(max(mx, s))
        trans.append(table)
        level = nxt
        maxima = nxt_maxima
    index = {w: i for i, w in enumerate(level)}
    return WalkVocabulary(length, level, index, trans)


def write_vocabulary(vocab: WalkVocabulary, path) -> None:
    """One walk per line, states space-separated; line number = index."""
    with open(path, "w") as f:
        for w in vocab.walks:
            f.write(" ".join(str(s) for s in w) + "\n")


def vocabulary_sizes(max_length: int) -> list[int]:
    """Vocabulary size for each length 1..max_length (cheap count-only pass)."""
    sizes = []
    # count by (last state, running max) occupancy: the walk prefix itself
    # does not matter for counting extensions
    level = {(1, 1): 1}
    for j in range(max_length):
        nxt = {}
        for (last, mx), c in level.items():
            for s in range(1, mx + 2):
                if s == last:
                    continue
                key = (s, max(mx, s))
                nxt[key] = nxt.get(key, 0) + c
        level = nxt
        sizes.append(sum(level.values()))
    return sizes
