"""Graph containers, dataset ingestion, and synthetic graph generation.

Graphs are stored as flat arc arrays (source, target, weight). Undirected
graphs keep both arcs of every edge so that downstream transition-probability
code never needs to know about directedness.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)


class GraphFormatError(ValueError):
    """Raised when an input file does not conform to the expected format."""


@dataclass
class Graph:
    """A weighted directed multigraph with contiguous integer node ids.

    For undirected graphs (``directed=False``) every edge is stored as two
    opposite arcs of equal weight. Self-loops are rejected; ingestion strips
    them before construction.
    """

    node_count: int
    sources: np.ndarray
    targets: np.ndarray
    weights: np.ndarray
    label: int | None = None
    directed: bool = False

    def __post_init__(self):
        if self.node_count < 1:
            raise ValueError("graph must have at least one node")
        self.sources = np.asarray(self.sources, dtype=np.int64)
        self.targets = np.asarray(self.targets, dtype=np.int64)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if not (self.sources.shape == self.targets.shape == self.weights.shape):
            raise ValueError("arc arrays must have equal length")
        if self.sources.size:
            lo = min(self.sources.min(), self.targets.min())
            hi = max(self.sources.max(), self.targets.max())
            if lo < 0 or hi >= self.node_count:
                raise ValueError("arc endpoint outside 0..node_count-1")
            if np.any(self.weights <= 0):
                raise ValueError("arc weights must be strictly positive")
            if np.any(self.sources == self.targets):
                raise ValueError("self-loops are not allowed")

    @classmethod
    def from_edges(cls, node_count, edges, label=None, directed=False):
        """Build a graph from ``(u, v)`` or ``(u, v, w)`` tuples.

        For undirected graphs each input edge yields both arcs; unweighted
        edges get weight 1.0.
        """
        srcs, dsts, ws = [], [], []
        for e in edges:
            u, v = int(e[0]), int(e[1])
            w = float(e[2]) if len(e) > 2 else 1.0
            srcs.append(u)
            dsts.append(v)
            ws.append(w)
            if not directed:
                srcs.append(v)
                dsts.append(u)
                ws.append(w)
        return cls(node_count, np.array(srcs, dtype=np.int64),
                   np.array(dsts, dtype=np.int64),
                   np.array(ws, dtype=np.float64),
                   label=label, directed=directed)

    @property
    def arc_count(self) -> int:
        return int(self.sources.size)

    @property
    def edge_count(self) -> int:
        """Number of edges (undirected pairs counted once)."""
        return self.arc_count if self.directed else self.arc_count // 2

    def out_degrees(self) -> np.ndarray:
        return np.bincount(self.sources, minlength=self.node_count)

    def isolated_nodes(self) -> np.ndarray:
        """Nodes with no incident arcs in either direction."""
        deg = np.bincount(self.sources, minlength=self.node_count)
        deg += np.bincount(self.targets, minlength=self.node_count)
        return np.flatnonzero(deg == 0)

    def arc_multiset(self):
        """Sorted (u, v, w) triples; equality of graphs up to arc order."""
        order = np.lexsort((self.weights, self.targets, self.sources))
        return list(zip(self.sources[order].tolist(),
                        self.targets[order].tolist(),
                        self.weights[order].tolist()))

    def permuted(self, perm) -> "Graph":
        """Relabel nodes by ``perm`` (node u becomes perm[u])."""
        perm = np.asarray(perm, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(self.node_count)):
            raise ValueError("perm must be a permutation of node ids")
        return Graph(self.node_count, perm[self.sources], perm[self.targets],
                     self.weights.copy(), label=self.label, directed=self.directed)


@dataclass
class GraphCollection:
    """An ordered set of graphs with one class label per graph."""

    graphs: list[Graph]
    labels: np.ndarray
    name: str = ""
    stripped_self_loops: int = 0
    label_names: list = field(default_factory=list)

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if len(self.graphs) != self.labels.size:
            raise ValueError("one label per graph required")
        if self.labels.size:
            classes = np.unique(self.labels)
            if classes[0] != 0 or classes[-1] != classes.size - 1:
                raise ValueError("class ids must be contiguous from 0")

    def __len__(self):
        return len(self.graphs)

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0


def _normalize_labels(raw):
    """Map arbitrary class values to contiguous ids 0..k-1 (sorted order)."""
    names = sorted(set(raw))
    mapping = {v: i for i, v in enumerate(names)}
    return np.array([mapping[v] for v in raw], dtype=np.int64), names


def _dedupe_undirected(pairs_w):
    """Collapse duplicate undirected edges, keeping the first weight seen."""
    seen = {}
    for u, v, w in pairs_w:
        key = (u, v) if u <= v else (v, u)
        if key not in seen:
            seen[key] = w
    return [(u, v, w) for (u, v), w in seen.items()]


def load_collection(path, fmt="benchmark-collection", name=None) -> GraphCollection:
    """Load a graph classification dataset from disk.

    ``benchmark-collection``: a directory of ``DS_A.txt`` (edges "i, j",
    1-based global node ids), ``DS_graph_indicator.txt`` (graph id per node)
    and ``DS_graph_labels.txt`` (class per graph). Node/edge label files are
    ignored; the embeddings use topology only.

    ``edge-list-dir``: one file per graph with lines ``u v [w]`` (0-based
    local ids) plus a ``labels.txt`` sidecar, one class per graph file in
    sorted filename order.
    """
    if not os.path.isdir(path):
        raise GraphFormatError(f"dataset directory not found: {path}")
    if fmt == "benchmark-collection":
        return _load_benchmark(path, name)
    if fmt == "edge-list-dir":
        return _load_edge_list_dir(path, name)
    raise ValueError(f"unknown dataset format: {fmt!r}")


def _find_one(path, suffix):
    hits = [f for f in os.listdir(path) if f.endswith(suffix)]
    if len(hits) != 1:
        raise GraphFormatError(
            f"expected exactly one *{suffix} file in {path}, found {len(hits)}")
    return os.path.join(path, hits[0])


def _load_benchmark(path, name):
    a_file = _find_one(path, "_A.txt")
    ind_file = _find_one(path, "_graph_indicator.txt")
    lab_file = _find_one(path, "_graph_labels.txt")
    ds_name = name or os.path.basename(a_file)[:-len("_A.txt")]

    with open(ind_file) as f:
        graph_of_node = []
        for ln, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                graph_of_node.append(int(line))
            except ValueError:
                raise GraphFormatError(f"{ind_file}:{ln}: not an integer: {line!r}")
    if not graph_of_node:
        raise GraphFormatError(f"{ind_file}: empty graph indicator")
    graph_of_node = np.array(graph_of_node, dtype=np.int64)
    n_graphs = int(graph_of_node.max())
    # global 1-based node id -> (graph index, local 0-based id)
    local_id = np.zeros(graph_of_node.size, dtype=np.int64)
    node_counts = np.zeros(n_graphs, dtype=np.int64)
    for i, g in enumerate(graph_of_node):
        local_id[i] = node_counts[g - 1]
        node_counts[g - 1] += 1
    if np.any(node_counts == 0):
        bad = int(np.flatnonzero(node_counts == 0)[0]) + 1
        raise GraphFormatError(f"{ind_file}: graph {bad} has zero nodes")

    per_graph_edges = [[] for _ in range(n_graphs)]
    self_loops = 0
    with open(a_file) as f:
        for ln, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise GraphFormatError(f"{a_file}:{ln}: expected 'i, j', got {line!r}")
            try:
                i, j = int(parts[0]), int(parts[1])
            except ValueError:
                raise GraphFormatError(f"{a_file}:{ln}: non-integer node id: {line!r}")
            if not (1 <= i <= graph_of_node.size and 1 <= j <= graph_of_node.size):
                raise GraphFormatError(
                    f"{a_file}:{ln}: node id outside 1..{graph_of_node.size}")
            gi, gj = graph_of_node[i - 1], graph_of_node[j - 1]
            if gi != gj:
                raise GraphFormatError(
                    f"{a_file}:{ln}: edge connects graphs {gi} and {gj}")
            if i == j:
                self_loops += 1
                continue
            per_graph_edges[gi - 1].append((int(local_id[i - 1]),
                                            int(local_id[j - 1]), 1.0))

    with open(lab_file) as f:
        raw_labels = [line.strip() for line in f if line.strip()]
    if len(raw_labels) != n_graphs:
        raise GraphFormatError(
            f"{lab_file}: {len(raw_labels)} labels for {n_graphs} graphs")
    labels, label_names = _normalize_labels(raw_labels)

    graphs = []
    for g in range(n_graphs):
        edges = _dedupe_undirected(per_graph_edges[g])
        graphs.append(Graph.from_edges(int(node_counts[g]), edges,
                                       label=int(labels[g]), directed=False))
    if self_loops:
        log.warning("%s: stripped %d self-loop(s)", ds_name, self_loops)
    coll = GraphCollection(graphs, labels, name=ds_name,
                           stripped_self_loops=self_loops,
                           label_names=label_names)
    _warn_isolated(coll)
    return coll


def _load_edge_list_dir(path, name):
    files = sorted(f for f in os.listdir(path)
                   if f != "labels.txt" and os.path.isfile(os.path.join(path, f)))
    if not files:
        raise GraphFormatError(f"no graph files in {path}")
    labels_path = os.path.join(path, "labels.txt")
    if not os.path.isfile(labels_path):
        raise GraphFormatError(f"missing labels.txt in {path}")
    with open(labels_path) as f:
        raw_labels = [line.strip() for line in f if line.strip()]
    if len(raw_labels) != len(files):
        raise GraphFormatError(
            f"{labels_path}: {len(raw_labels)} labels for {len(files)} graph files")
    labels, label_names = _normalize_labels(raw_labels)

    graphs = []
    total_loops = 0
    for gi, fname in enumerate(files):
        fpath = os.path.join(path, fname)
        edges = []
        max_id = -1
        declared = None
        with open(fpath) as f:
            for ln, line in enumerate(f, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    if line.startswith("#nodes"):
                        declared = int(line.split()[1])
                    continue
                parts = line.split()
                if len(parts) not in (2, 3):
                    raise GraphFormatError(
                        f"{fpath}:{ln}: expected 'u v [w]', got {line!r}")
                try:
                    u, v = int(parts[0]), int(parts[1])
                    w = float(parts[2]) if len(parts) == 3 else 1.0
                except ValueError:
                    raise GraphFormatError(f"{fpath}:{ln}: malformed record: {line!r}")
                if u < 0 or v < 0:
                    raise GraphFormatError(f"{fpath}:{ln}: negative node id")
                if declared is not None and (u >= declared or v >= declared):
                    raise GraphFormatError(
                        f"{fpath}:{ln}: node id beyond declared count {declared}")
                if w <= 0:
                    raise GraphFormatError(f"{fpath}:{ln}: non-positive weight")
                if u == v:
                    total_loops += 1
                    continue
                max_id = max(max_id, u, v)
                edges.append((u, v, w))
        if max_id < 0 and declared is None:
            raise GraphFormatError(f"{fpath}: graph with zero nodes")
        n = declared if declared is not None else max_id + 1
        graphs.append(Graph.from_edges(n, _dedupe_undirected(edges),
                                       label=int(labels[gi]), directed=False))
    if total_loops:
        log.warning("%s: stripped %d self-loop(s)", path, total_loops)
    coll = GraphCollection(graphs, labels, name=name or os.path.basename(path),
                           stripped_self_loops=total_loops,
                           label_names=label_names)
    _warn_isolated(coll)
    return coll


def _warn_isolated(coll):
    n_iso = sum(g.isolated_nodes().size for g in coll.graphs)
    if n_iso:
        log.warning("%s: %d isolated node(s); they are kept but never start walks",
                    coll.name, n_iso)


def save_collection(coll: GraphCollection, path) -> None:
    """Write a collection in edge-list-dir format (lossless for weights)."""
    os.makedirs(path, exist_ok=True)
    width = len(str(len(coll) - 1))
    for gi, g in enumerate(coll.graphs):
        fname = os.path.join(path, f"graph_{gi:0{width}d}.txt")
        with open(fname, "w") as f:
            f.write(f"#nodes {g.node_count}\n")
            written = set()
            for u, v, w in zip(g.sources.tolist(), g.targets.tolist(),
                               g.weights.tolist()):
                key = (u, v) if g.directed else (min(u, v), max(u, v))
                if key in written:
                    continue
                written.add(key)
                f.write(f"{key[0]} {key[1]} {w!r}\n")
    with open(os.path.join(path, "labels.txt"), "w") as f:
        for y in coll.labels.tolist():
            f.write(f"{y}\n")


def generate_erdos_renyi(n: int, p: float, seed: int) -> Graph:
    """G(n, p): each of the C(n, 2) node pairs is an edge with probability p.

    Deterministic for a fixed seed. Rows are drawn one source node at a time
    so memory stays O(n) even for large graphs.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0.0 <= p <= 1.0):
        raise ValueError("p must be in [0, 1]")
    rng = np.random.default_rng(seed)
    srcs, dsts = [], []
    for u in range(n - 1):
        hits = np.flatnonzero(rng.random(n - 1 - u) < p) + u + 1
        if hits.size:
            srcs.append(np.full(hits.size, u, dtype=np.int64))
            dsts.append(hits.astype(np.int64))
    if srcs:
        u_arr = np.concatenate(srcs)
        v_arr = np.concatenate(dsts)
    else:
        u_arr = np.empty(0, dtype=np.int64)
        v_arr = np.empty(0, dtype=np.int64)
    sources = np.concatenate([u_arr, v_arr])
    targets = np.concatenate([v_arr, u_arr])
    weights = np.ones(sources.size, dtype=np.float64)
    return Graph(n, sources, targets, weights, directed=False)
