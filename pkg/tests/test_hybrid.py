"""Hybrid planarity tests against the brute-force oracles."""

import random

import pytest

from hybridplan.errors import (
    INFEASIBLE,
    FrameNotBiconnected,
    MissingSideAnnotation,
    NotAClique,
)
from hybridplan.graph import (
    FlatClusteredGraph,
    Graph,
    PolyLinkCluster,
    SideAnnotation,
    check_rotation_planarity,
    is_planar,
)
from hybridplan.hybrid import (
    Witness,
    clique_to_polylink,
    constraint_dag_nodetrix,
    equipped_frame_graph,
    nodetrix_constraints,
    test_clique_planarity_fixed_sides,
    test_polylink,
    test_rci_nt,
)
from hybridplan.onefixed import validate_constraint
from hybridplan.oracle import OracleBudget, oracle_polylink, oracle_rci
from hybridplan.simfpq import fixedness, is_k_fixed, p_degree

from instance_gen import (
    random_clique_instance,
    random_nodetrix_instance,
    random_polylink_instance,
)


def two_cluster_bundle(k=2):
    """Two singleton clusters joined by k parallel edges."""
    g = Graph.build([0, 1], [(0, 1)] * k)
    sides = []
    for e in range(k):
        sides.append(SideAnnotation(e, 0, "R"))
        sides.append(SideAnnotation(e, 1, "L"))
    return FlatClusteredGraph(g, ((0, (0,)), (1, (1,))), tuple(sides))


def ring_instance(k, ring_order):
    """One cluster with k row vertices plus singleton ring neighbours in a
    wheel; the rigid ring forces the cyclic order of the spokes around the
    cluster.  ``ring_order`` lists (row vertex, side letter) per spoke in
    the forced boundary order.  Ring vertices keep each of their three
    edges on its own matrix side so the oracle has nothing to braid.
    """
    n_ring = len(ring_order)
    vertices = list(range(k)) + [100 + i for i in range(n_ring)]
    edges = []
    sides = []
    eid = 0
    for i, (row, side) in enumerate(ring_order):
        edges.append((eid, row, 100 + i))  # spoke towards the hub cluster
        sides.append(SideAnnotation(eid, row, side))
        sides.append(SideAnnotation(eid, 100 + i, "B"))
        eid += 1
    for i in range(n_ring):
        edges.append((eid, 100 + i, 100 + (i + 1) % n_ring))
        sides.append(SideAnnotation(eid, 100 + i, "R"))
        sides.append(SideAnnotation(eid, 100 + (i + 1) % n_ring, "L"))
        eid += 1
    g = Graph(tuple(vertices), tuple(edges))
    clusters = ((0, tuple(range(k))),) + tuple(
        (i + 1, (100 + i,)) for i in range(n_ring)
    )
    return FlatClusteredGraph(g, clusters, tuple(sides))



def oracle_or_skip(fn, *args, **kwargs):
    """Run an oracle under a small state budget; None when out of budget."""
    from hybridplan.errors import BudgetExceeded

    kwargs.setdefault("budget", OracleBudget(max_states=200_000))
    try:
        return fn(*args, **kwargs)
    except BudgetExceeded:
        return None


class TestFrameGraph:
    def test_parallel_edges_preserved(self):
        fcg = two_cluster_bundle(3)
        frame, prov = equipped_frame_graph(fcg)
        assert len(frame.vertices) == 2 and len(frame.edges) == 3

    def test_intra_edges_dropped(self):
        g = Graph.build([0, 1, 2], [(0, 1), (1, 2)])
        fcg = FlatClusteredGraph(g, ((0, (0, 1, 2)),))
        frame, _ = equipped_frame_graph(fcg)
        assert len(frame.edges) == 0 and len(frame.vertices) == 1

    def test_unclustered_vertices_become_singletons(self):
        g = Graph.build([0, 1], [(0, 1), (0, 1)])
        fcg = FlatClusteredGraph(
            g, ((5, (0,)),),
            (SideAnnotation(0, 0, "R"), SideAnnotation(0, 1, "L"),
             SideAnnotation(1, 0, "R"), SideAnnotation(1, 1, "L")),
        )
        frame, _ = equipped_frame_graph(fcg)
        assert sorted(frame.vertices) == [-2, 5]


class TestConstraintDag:
    def build(self, fcg, cid=0):
        frame, prov = equipped_frame_graph(fcg)
        return frame, nodetrix_constraints(fcg, frame, prov)[cid]

    def test_one_edge_per_side_cluster(self):
        g = Graph.build([0, 1, 2, 3, 4],
                        [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (2, 3),
                         (3, 4), (4, 1)])
        sides = [SideAnnotation(0, 0, "T"), SideAnnotation(1, 0, "R"),
                 SideAnnotation(2, 0, "B"), SideAnnotation(3, 0, "L")]
        for e in range(8):
            _, u, v = g.edges[e]
            for x in (u, v):
                if x != 0:
                    sides.append(SideAnnotation(e, x, "T"))
        fcg = FlatClusteredGraph(g, ((0, (0,)),), tuple(sides))
        frame, cdag = self.build(fcg)
        assert validate_constraint(cdag.constraint, frame, 0)
        src = cdag.constraint.source_tree()
        assert src.kind == "F" and len(src.children) == 4

    def test_missing_annotation(self):
        g = Graph.build([0, 1], [(0, 1), (0, 1)])
        fcg = FlatClusteredGraph(
            g, ((0, (0,)), (1, (1,))),
            (SideAnnotation(0, 0, "R"), SideAnnotation(0, 1, "L"),
             SideAnnotation(1, 0, "R")),
        )
        frame, prov = equipped_frame_graph(fcg)
        with pytest.raises(MissingSideAnnotation):
            nodetrix_constraints(fcg, frame, prov)

    def test_constraints_are_one_fixed(self):
        rng = random.Random(5)
        for _ in range(25):
            fcg = random_nodetrix_instance(rng)
            frame, prov = equipped_frame_graph(fcg)
            for cid, cdag in nodetrix_constraints(fcg, frame, prov).items():
                inst = cdag.constraint.instance
                assert inst.height() <= 1
                assert p_degree(inst) <= 2
                assert is_k_fixed(inst, 1)
                assert validate_constraint(cdag.constraint, frame, cid)


class TestRciNt:
    def test_two_singletons(self):
        w = test_rci_nt(two_cluster_bundle(2))
        assert isinstance(w, Witness)
        assert is_planar(w.expanded)
        assert check_rotation_planarity(w.expanded, w.expanded_rotation)

    def test_k5_frame_infeasible(self):
        pairs = [(a, b) for a in range(5) for b in range(a + 1, 5)]
        g = Graph.build(range(5), pairs)
        # each vertex has degree 4: one edge per matrix side, so the oracle
        # has a single rotation tuple to check (K5 has no planar rotation)
        letters = ("T", "R", "B", "L")
        counts = {v: 0 for v in range(5)}
        sides = []
        for e, u, v in g.edges:
            for x in (u, v):
                sides.append(SideAnnotation(e, x, letters[counts[x]]))
                counts[x] += 1
        fcg = FlatClusteredGraph(
            g, tuple((i, (i,)) for i in range(5)), tuple(sides)
        )
        assert test_rci_nt(fcg) is INFEASIBLE
        assert not oracle_rci(fcg, OracleBudget(max_clusters=5, max_edges=10))

    def test_frame_not_biconnected(self):
        g = Graph.build([0, 1, 2], [(0, 1), (1, 2)])
        fcg = FlatClusteredGraph(
            g, ((0, (0,)), (1, (1,)), (2, (2,))),
            (SideAnnotation(0, 0, "R"), SideAnnotation(0, 1, "L"),
             SideAnnotation(1, 1, "R"), SideAnnotation(1, 2, "L")),
        )
        with pytest.raises(FrameNotBiconnected):
            test_rci_nt(fcg)

    def test_wheel_forces_row_order(self):
        # rows a,b,c with right-side spokes in ring order (a,b,c) and
        # top-side spokes in ring order (a,c,b): RCI planar only because
        # rows and columns may differ
        ring = [(0, "R"), (1, "R"), (2, "R"), (1, "T"), (2, "T"), (0, "T")]
        fcg = ring_instance(3, ring)
        got = test_rci_nt(fcg)
        want = oracle_rci(fcg, OracleBudget(max_clusters=8, max_edges=12))
        assert (got is not INFEASIBLE) == want

    def test_randomized_vs_oracle(self):
        rng = random.Random(2718)
        disagreements = []
        done = 0
        while done < 120:
            fcg = random_nodetrix_instance(rng)
            want = oracle_or_skip(oracle_rci, fcg)
            if want is None:
                continue
            got = test_rci_nt(fcg)
            if (got is not INFEASIBLE) != want:
                disagreements.append(done)
            if got is not INFEASIBLE:
                assert is_planar(got.expanded)
                assert check_rotation_planarity(got.expanded,
                                                got.expanded_rotation)
            done += 1
        assert not disagreements

    def test_antipodal_coherence_in_witnesses(self):
        rng = random.Random(97)
        found = 0
        while found < 15:
            fcg = random_nodetrix_instance(rng, max_cluster_size=3)
            w = test_rci_nt(fcg)
            if w is INFEASIBLE:
                continue
            found += 1
            for layout in w.clusters:
                for (s1, s2), perm in layout.pair_orders.items():
                    seq1 = [v for v, _ in layout.side_orders.get(s1, ())]
                    seq2 = [v for v, _ in layout.side_orders.get(s2, ())]
                    common = set(seq1) & set(seq2)
                    a = [v for v in seq1 if v in common]
                    b = [v for v in reversed(seq2) if v in common]
                    assert a == b

    def test_monotone_specialization(self):
        # freezing the coherence permutations can only lose feasibility
        rng = random.Random(12)
        for _ in range(40):
            fcg = random_nodetrix_instance(rng)
            free = test_rci_nt(fcg)
            rigid = test_rci_nt(fcg, rigid_coherence=True)
            if free is INFEASIBLE:
                assert rigid is INFEASIBLE


class TestDistinguishingInstance:
    def test_rci_planar_but_not_rows_equal_cols(self):
        ring = [(0, "R"), (1, "R"), (2, "R"), (1, "T"), (2, "T"), (0, "T")]
        fcg = ring_instance(3, ring)
        budget = OracleBudget(max_clusters=8, max_edges=12)
        assert oracle_rci(fcg, budget)
        assert not oracle_rci(fcg, budget, rows_equal_cols=True)
        assert test_rci_nt(fcg) is not INFEASIBLE

    def test_restricted_oracle_is_monotone(self):
        rng = random.Random(6)
        done = 0
        while done < 25:
            fcg = random_nodetrix_instance(rng)
            restricted = oracle_or_skip(oracle_rci, fcg, rows_equal_cols=True)
            if restricted is None:
                continue
            if restricted:
                assert oracle_or_skip(oracle_rci, fcg)
            done += 1


class TestPolyLink:
    def test_sigma2_instances(self):
        rng = random.Random(8)
        done = 0
        while done < 40:
            fcg = random_polylink_instance(rng, sigmas=(2,))
            want = oracle_or_skip(oracle_polylink, fcg)
            if want is None:
                continue
            got = test_polylink(fcg)
            assert (got is not INFEASIBLE) == want
            done += 1

    def test_randomized_vs_oracle(self):
        rng = random.Random(88)
        done = 0
        while done < 80:
            fcg = random_polylink_instance(rng)
            want = oracle_or_skip(oracle_polylink, fcg)
            if want is None:
                continue
            got = test_polylink(fcg)
            assert (got is not INFEASIBLE) == want
            if got is not INFEASIBLE:
                assert check_rotation_planarity(got.expanded,
                                                got.expanded_rotation)
            done += 1

    def test_nodetrix_shaped_polylink_matches_rci(self):
        rng = random.Random(15)
        for _ in range(40):
            fcg = random_nodetrix_instance(rng)
            # model each matrix as a 4-gon owning both pairs
            side_map = {"T": 0, "R": 1, "B": 2, "L": 3}
            sides = tuple(
                SideAnnotation(s.edge, s.endpoint, side_map[s.side])
                for s in fcg.sides
            )
            polylink = tuple(
                PolyLinkCluster(cid, 4, ((tuple(sorted(vs)),
                                          ((0, 2), (1, 3))),))
                for cid, vs in fcg.clusters
            )
            as_poly = FlatClusteredGraph(fcg.graph, fcg.clusters, sides,
                                         polylink)
            a = test_rci_nt(fcg)
            b = test_polylink(as_poly)
            assert (a is INFEASIBLE) == (b is INFEASIBLE)


class TestClique:
    def test_not_a_clique(self):
        g = Graph.build([0, 1, 2, 3], [(0, 2), (1, 3), (0, 3), (1, 2)])
        fcg = FlatClusteredGraph(
            g, ((0, (0, 1)), (1, (2, 3))),
            tuple(
                SideAnnotation(e, x, "R")
                for e, u, v in g.edges for x in (u, v)
            ),
        )
        with pytest.raises(NotAClique):
            clique_to_polylink(fcg)

    def test_size_three_modeling(self):
        rng = random.Random(3)
        fcg = random_clique_instance(rng, max_clusters=2, max_cluster_size=3)
        modeled = clique_to_polylink(fcg)
        for pc in modeled.polylink:
            vs = dict(modeled.cluster_vertices())[pc.cluster_id]
            if len(vs) >= 3:
                assert pc.sigma == 4
                pair_sizes = sorted(len(g[0]) for g in pc.groups)
                assert pair_sizes == sorted([2, len(vs) - 2])
            else:
                assert pc.sigma == 2

    def test_verdicts_match_polylink_oracle(self):
        rng = random.Random(64)
        done = 0
        while done < 60:
            fcg = random_clique_instance(rng)
            try:
                modeled = clique_to_polylink(fcg)
            except Exception:
                assert test_clique_planarity_fixed_sides(fcg) is INFEASIBLE
                done += 1
                continue
            want = oracle_or_skip(oracle_polylink, modeled)
            if want is None:
                continue
            got = test_clique_planarity_fixed_sides(fcg)
            assert (got is not INFEASIBLE) == want
            done += 1
