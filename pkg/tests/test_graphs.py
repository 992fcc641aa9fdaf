import os

import numpy as np
import pytest

from anonwalks.graphs import (Graph, GraphCollection, GraphFormatError,
                              generate_erdos_renyi, load_collection,
                              save_collection)

from conftest import make_complete, make_cycle, write_benchmark_fixture


class TestGraph:
    def test_undirected_stores_both_arcs(self):
        g = Graph.from_edges(3, [(0, 1), (1, 2)])
        arcs = set(zip(g.sources.tolist(), g.targets.tolist()))
        assert arcs == {(0, 1), (1, 0), (1, 2), (2, 1)}
        assert g.edge_count == 2
        assert np.all(g.weights == 1.0)

    def test_directed_keeps_single_arc(self):
        g = Graph.from_edges(2, [(0, 1, 2.5)], directed=True)
        assert g.arc_count == 1
        assert g.weights[0] == 2.5

    def test_rejects_self_loops(self):
        with pytest.raises(ValueError, match="self-loop"):
            Graph.from_edges(2, [(0, 0)])

    def test_rejects_bad_ids_and_weights(self):
        with pytest.raises(ValueError):
            Graph.from_edges(2, [(0, 5)])
        with pytest.raises(ValueError):
            Graph.from_edges(2, [(0, 1, -1.0)])
        with pytest.raises(ValueError):
            Graph(0, np.array([]), np.array([]), np.array([]))

    def test_adjacency_symmetric_for_undirected(self):
        rng = np.random.default_rng(3)
        edges = [(i, j, float(rng.integers(1, 5)))
                 for i in range(10) for j in range(i + 1, 10)
                 if rng.random() < 0.4]
        g = Graph.from_edges(10, edges)
        arcs = set(zip(g.sources.tolist(), g.targets.tolist(), g.weights.tolist()))
        for u, v, w in arcs:
            assert (v, u, w) in arcs

    def test_isolated_nodes_detected(self):
        g = Graph.from_edges(4, [(0, 1)])
        assert g.isolated_nodes().tolist() == [2, 3]

    def test_permuted_preserves_structure(self):
        g = make_cycle(5)
        perm = [2, 0, 4, 1, 3]
        h = g.permuted(perm)
        # degree sequence is invariant
        assert sorted(np.bincount(h.sources, minlength=5)) == \
               sorted(np.bincount(g.sources, minlength=5))


class TestBenchmarkLoader:
    def test_two_graph_fixture(self, benchmark_dataset):
        coll = load_collection(benchmark_dataset, fmt="benchmark-collection")
        assert len(coll) == 2
        assert [g.node_count for g in coll.graphs] == [3, 2]
        assert coll.labels.tolist() == [0, 1]
        assert coll.graphs[0].edge_count == 3
        assert coll.graphs[1].edge_count == 1

    def test_self_loops_stripped_and_counted(self, tmp_path):
        root = write_benchmark_fixture(str(tmp_path / "DS"))
        with open(os.path.join(root, "TINY_A.txt"), "a") as f:
            f.write("1, 1\n")
        coll = load_collection(root)
        assert coll.stripped_self_loops == 1
        assert coll.graphs[0].edge_count == 3

    def test_duplicate_edges_collapsed(self, tmp_path):
        root = write_benchmark_fixture(str(tmp_path / "DS"))
        with open(os.path.join(root, "TINY_A.txt"), "a") as f:
            f.write("1, 2\n2, 1\n")
        coll = load_collection(root)
        assert coll.graphs[0].edge_count == 3

    def test_dangling_node_id_names_line(self, tmp_path):
        root = write_benchmark_fixture(str(tmp_path / "DS"))
        with open(os.path.join(root, "TINY_A.txt"), "a") as f:
            f.write("1, 99\n")
        with pytest.raises(GraphFormatError, match=r"TINY_A.txt:9"):
            load_collection(root)

    def test_malformed_edge_line(self, tmp_path):
        root = write_benchmark_fixture(str(tmp_path / "DS"))
        with open(os.path.join(root, "TINY_A.txt"), "a") as f:
            f.write("not an edge\n")
        with pytest.raises(GraphFormatError, match=":9"):
            load_collection(root)

    def test_label_count_mismatch(self, tmp_path):
        root = write_benchmark_fixture(str(tmp_path / "DS"))
        with open(os.path.join(root, "TINY_graph_labels.txt"), "a") as f:
            f.write("1\n")
        with pytest.raises(GraphFormatError, match="labels"):
            load_collection(root)

    def test_noncontiguous_labels_remapped(self, tmp_path):
        root = write_benchmark_fixture(str(tmp_path / "DS"))
        with open(os.path.join(root, "TINY_graph_labels.txt"), "w") as f:
            f.write("-1\n1\n")
        coll = load_collection(root)
        assert coll.labels.tolist() == [0, 1]


class TestBenchmarkDatasets:
    def test_mutag_statistics(self):
        from conftest import dataset_dir

        path = dataset_dir("MUTAG")
        if path is None:
            pytest.skip("MUTAG dataset not present (see README)")
        coll = load_collection(path)
        assert len(coll) == 188
        assert coll.n_classes == 2
        mean_nodes = np.mean([g.node_count for g in coll.graphs])
        assert abs(mean_nodes - 17.93) < 0.01


class TestEdgeListDir:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        graphs = [make_cycle(5, 0), make_complete(4, 1),
                  Graph.from_edges(3, [(0, 1, 0.25), (1, 2, 4.0)], label=0)]
        coll = GraphCollection(graphs, np.array([0, 1, 0]), name="rt")
        out = str(tmp_path / "rt")
        save_collection(coll, out)
        loaded = load_collection(out, fmt="edge-list-dir")
        assert len(loaded) == len(coll)
        assert loaded.labels.tolist() == coll.labels.tolist()
        for a, b in zip(coll.graphs, loaded.graphs):
            assert a.node_count == b.node_count
            assert a.arc_multiset() == b.arc_multiset()

    def test_id_beyond_declared_count(self, tmp_path):
        d = tmp_path / "bad"
        d.mkdir()
        (d / "graph_0.txt").write_text("#nodes 2\n0 1\n1 5\n")
        (d / "labels.txt").write_text("0\n")
        with pytest.raises(GraphFormatError, match=r"graph_0.txt:3"):
            load_collection(str(d), fmt="edge-list-dir")

    def test_missing_labels(self, tmp_path):
        d = tmp_path / "bad"
        d.mkdir()
        (d / "graph_0.txt").write_text("0 1\n")
        with pytest.raises(GraphFormatError, match="labels.txt"):
            load_collection(str(d), fmt="edge-list-dir")


class TestErdosRenyi:
    def test_p_zero_and_one(self):
        assert generate_erdos_renyi(5, 0.0, seed=1).edge_count == 0
        assert generate_erdos_renyi(5, 1.0, seed=1).edge_count == 10

    def test_edge_count_within_four_sigma(self):
        # C(1000,2) * 0.004 = 1998, sigma = sqrt(npairs * p * (1-p)) ~ 44.6
        g = generate_erdos_renyi(1000, 0.004, seed=123)
        npairs = 1000 * 999 / 2
        mean = npairs * 0.004
        sigma = np.sqrt(npairs * 0.004 * 0.996)
        assert abs(g.edge_count - mean) < 4 * sigma

    def test_bit_reproducible(self):
        a = generate_erdos_renyi(50, 0.2, seed=7)
        b = generate_erdos_renyi(50, 0.2, seed=7)
        assert np.array_equal(a.sources, b.sources)
        assert np.array_equal(a.targets, b.targets)
        c = generate_erdos_renyi(50, 0.2, seed=8)
        assert not (np.array_equal(a.sources, c.sources)
                    and np.array_equal(a.targets, c.targets))

    def test_simple_and_symmetric(self):
        g = generate_erdos_renyi(30, 0.3, seed=5)
        arcs = list(zip(g.sources.tolist(), g.targets.tolist()))
        assert len(arcs) == len(set(arcs))
        assert all(u != v for u, v in arcs)
        assert all((v, u) in set(arcs) for u, v in arcs)

    def test_preconditions(self):
        with pytest.raises(ValueError):
            generate_erdos_renyi(0, 0.5, seed=1)
        with pytest.raises(ValueError):
            generate_erdos_renyi(5, 1.5, seed=1)
