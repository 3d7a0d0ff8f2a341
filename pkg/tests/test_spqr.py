"""SPQR decomposition: shapes, re-glue identity, canonicality."""

import itertools
import random

import pytest

from hybridplan.errors import NotBiconnected, NotPlanar
from hybridplan.graph import Graph, is_biconnected, is_planar
from hybridplan.spqr import glue, spqr_decompose, validate_tree


def kinds(tree):
    return sorted(sk.kind for sk in tree.skeletons.values())


def test_cycle_single_s_node():
    c4 = Graph.build(range(4), [(0, 1), (1, 2), (2, 3), (3, 0)])
    tree = spqr_decompose(c4)
    assert kinds(tree) == ["S"]
    validate_tree(tree, c4)


def test_triple_edge_single_p_node():
    g = Graph.build([0, 1], [(0, 1)] * 3)
    tree = spqr_decompose(g)
    assert kinds(tree) == ["P"]
    validate_tree(tree, g)


def test_double_edge_is_a_cycle():
    g = Graph.build([0, 1], [(0, 1)] * 2)
    tree = spqr_decompose(g)
    assert kinds(tree) == ["S"]


def test_k4_single_r_node():
    k4 = Graph.build(range(4), itertools.combinations(range(4), 2))
    tree = spqr_decompose(k4)
    assert kinds(tree) == ["R"]
    validate_tree(tree, k4)


def test_theta_graph():
    # three internally disjoint paths between 0 and 1
    g = Graph.build(
        range(4), [(0, 1), (0, 2), (2, 1), (0, 3), (3, 1)]
    )
    tree = spqr_decompose(g)
    assert kinds(tree) == ["P", "S", "S"]
    validate_tree(tree, g)


def test_mixed_r_p_s_tree():
    # K4 core on {0,1,2,3} with edge (0,1) replaced by a direct edge plus
    # two parallel two-edge paths: P-node between 0 and 1, R-node for the
    # core, S-nodes for the paths
    edges = [(0, 1), (0, 4), (4, 1), (0, 5), (5, 1),
             (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    g = Graph.build(range(6), edges)
    tree = spqr_decompose(g)
    assert kinds(tree) == ["P", "R", "S", "S"]
    validate_tree(tree, g)
    p_nodes = [sk for sk in tree.skeletons.values() if sk.kind == "P"]
    assert len(p_nodes[0].edges) == 4  # direct + 2 path virtuals + R virtual


def test_preconditions():
    path = Graph.build(range(3), [(0, 1), (1, 2)])
    with pytest.raises(NotBiconnected):
        spqr_decompose(path)
    k5 = Graph.build(range(5), itertools.combinations(range(5), 2))
    with pytest.raises(NotPlanar):
        spqr_decompose(k5)


def random_biconnected_planar_multigraph(rng, n):
    while True:
        pairs = [(i, (i + 1) % n) for i in range(n)]
        for _ in range(rng.randrange(0, n + 2)):
            u, v = rng.sample(range(n), 2)
            cand = pairs + [(u, v)]
            if is_planar(Graph.build(range(n), cand)):
                pairs = cand
        g = Graph.build(range(n), pairs)
        if is_biconnected(g):
            return g


def test_random_graphs_reglue_and_shapes():
    rng = random.Random(42)
    for _ in range(40):
        g = random_biconnected_planar_multigraph(rng, rng.randrange(3, 9))
        tree = spqr_decompose(g)
        validate_tree(tree, g)
        assert sorted(glue(tree).edges) == sorted(g.edges)
