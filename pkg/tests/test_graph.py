import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fastonl.graph import (GraphFormatError, LabelSequence, from_edges, karate, largest_connected_component,
                           load_dataset, load_edge_list, load_labels, volume, write_edge_list)
from fastonl.synthetic import random_graph, star


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_path_graph_degrees(tmp_path):
    g = load_edge_list(write(tmp_path, "e.txt", "0 1\n1 2"))
    assert g.n == 3 and g.m == 1 + 1
    np.testing.assert_array_equal(g.d, [1, 2, 1])
    np.testing.assert_array_equal(g.D, [1.0, 2.0, 1.0])


def test_duplicate_edges_collapse(tmp_path):
    g = load_edge_list(write(tmp_path, "e.txt", "0 1 2.0\n0 1 2.0\n1 0 2.0\n"))
    assert g.m == 1
    np.testing.assert_array_equal(g.D, [2.0, 2.0])


def test_unweighted_flag_ignores_weights(tmp_path):
    g = load_edge_list(write(tmp_path, "e.txt", "0 1 5\n1 2 7\n"), weighted=False)
    np.testing.assert_array_equal(g.weights, 1.0)


def test_karate_size(karate_data):
    g, labels = karate_data
    assert (g.n, g.m) == (34, 78)
    assert labels.k == 2 and len(labels) == 34


def test_malformed_line_reports_line_number(tmp_path):
    path = write(tmp_path, "e.txt", "0 1\n\n1 2 3 4\n")
    with pytest.raises(GraphFormatError, match=":3:"):
        load_edge_list(path)
    with pytest.raises(GraphFormatError, match=":1:"):
        load_edge_list(write(tmp_path, "f.txt", "a b\n"))


@pytest.mark.parametrize("w", ["0", "-1.5", "nan"])
def test_nonpositive_weight_rejected(tmp_path, w):
    with pytest.raises(GraphFormatError, match="weight"):
        load_edge_list(write(tmp_path, "e.txt", f"0 1 {w}\n"))


def test_self_loops_dropped_with_warning(tmp_path):
    with pytest.warns(UserWarning, match="2 self-loop"):
        g = load_edge_list(write(tmp_path, "e.txt", "0 0\n0 1\n1 1\n"))
    assert g.m == 1 and g.info["self_loops"] == 2


def test_node_ids_compacted(tmp_path):
    g = load_edge_list(write(tmp_path, "e.txt", "10 30\n30 20\n"))
    np.testing.assert_array_equal(g.node_ids, [10, 20, 30])
    np.testing.assert_array_equal(g.d, [1, 1, 2])


def test_labels_and_singletons(tmp_path):
    edges = write(tmp_path, "e.txt", "1 2\n2 3\n")
    labels = write(tmp_path, "l.txt", "3 b\n1 a\n2 a\n9 c\n")
    g, seq = load_dataset(edges, labels)
    assert g.n == 4 and g.d[3] == 0
    assert seq.names == ("a", "b", "c")
    np.testing.assert_array_equal(seq.labels, [0, 0, 1, 2])
    np.testing.assert_array_equal(seq.order, [2, 0, 1, 3])
    with pytest.raises(GraphFormatError, match="unknown node"):
        load_labels(labels, load_edge_list(edges))


def test_order_file(tmp_path):
    edges = write(tmp_path, "e.txt", "1 2\n2 3\n")
    labels = write(tmp_path, "l.txt", "1 0\n2 1\n3 0\n")
    order = write(tmp_path, "o.txt", "3\n1\n2\n")
    g, seq = load_dataset(edges, labels, order)
    np.testing.assert_array_equal(seq.order, [2, 0, 1])


def test_order_must_be_permutation():
    with pytest.raises(GraphFormatError):
        LabelSequence(np.array([0, 1, 0]), 2, np.array([0, 1, 1]))
    with pytest.raises(GraphFormatError):
        LabelSequence(np.array([0, 2]), 2, np.array([0, 1]))


def test_lcc_keeps_largest_triangle():
    g = from_edges([0, 1, 2, 3, 4, 5, 6], [1, 2, 0, 4, 5, 6, 3])  # triangle + 4-cycle
    seq = LabelSequence(np.array([0, -1, -1, 1, -1, -1, -1]), 2, np.array([0, 3]))
    sub, sub_seq = largest_connected_component(g, seq)
    assert (sub.n, sub.m) == (4, 4)
    np.testing.assert_array_equal(sub.node_ids, [3, 4, 5, 6])
    np.testing.assert_array_equal(sub_seq.order, [0])
    assert sub_seq.labels[0] == 1


def test_lcc_of_two_triangles_picks_one():
    g = from_edges([0, 1, 2, 3, 4, 5], [1, 2, 0, 4, 5, 3])
    seq = LabelSequence(np.array([0, -1, -1, 1, -1, -1]), 2, np.array([3, 0]))
    sub, sub_seq = largest_connected_component(g, seq)
    assert (sub.n, sub.m) == (3, 3)
    assert len(sub_seq) == 1


def test_lcc_identity_on_connected(karate_data):
    g, seq = karate_data
    sub, sub_seq = largest_connected_component(g, seq)
    assert (sub.n, sub.m) == (g.n, g.m)
    np.testing.assert_array_equal(sub_seq.order, seq.order)


def test_lcc_empty_graph():
    with pytest.raises(GraphFormatError):
        largest_connected_component(from_edges([], [], n=0))


def test_volume():
    g = from_edges([0, 1], [1, 2])
    assert volume(g, []) == 0
    assert volume(g, range(3)) == 4
    assert volume(star(5), [0]) == 5
    with pytest.raises(IndexError):
        volume(g, [3])


@given(st.integers(2, 40), st.floats(0.0, 0.5), st.integers(0, 10_000), st.booleans())
def test_round_trip_and_degree_sums(tmp_path_factory, n, p, seed, weighted):
    g = random_graph(n, p, seed, weighted=weighted, connected=False)
    path = tmp_path_factory.mktemp("rt") / "g.txt"
    write_edge_list(g, path)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        h = load_edge_list(path) if g.m else g
    if g.m:
        # isolated nodes are not representable in an edge list
        keep = g.d > 0
        np.testing.assert_array_equal(h.node_ids, g.node_ids[keep])
        np.testing.assert_array_equal(h.adjacency().toarray(), g.adjacency().toarray()[np.ix_(keep, keep)])
    A = g.adjacency().toarray()
    np.testing.assert_array_equal(A, A.T)
    assert np.all(np.diag(A) == 0)
    np.testing.assert_allclose(g.D, A.sum(axis=1), rtol=1e-12)
    np.testing.assert_array_equal(g.d, (A > 0).sum(axis=1))
    if not weighted:
        assert volume(g, range(g.n)) == 2 * g.m
