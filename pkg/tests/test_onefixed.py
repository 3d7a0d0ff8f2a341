"""1-fixed constrained planarity against the brute-force oracle."""

import itertools
import random

import pytest

from hybridplan.errors import INFEASIBLE, InvalidConstraint, NotBiconnected
from hybridplan import fpqtree as fpq
from hybridplan.graph import Graph, check_rotation_planarity, is_biconnected, is_planar
from hybridplan.onefixed import (
    OneFixedConstraint,
    fixed_order_constraint,
    satisfies,
    test_one_fixed_planarity,
    trivial_constraint,
    validate_constraint,
)
from hybridplan.simfpq import Arc, SimFpqInstance

from test_embedding import all_rotation_systems, complete_graph, cycle_graph


def brute_force_verdict(g, constraints):
    """Exists a planar rotation system satisfying all constraints."""
    full = dict(constraints)
    for v in g.vertices:
        full.setdefault(v, trivial_constraint(g, v))
    for rs in all_rotation_systems(g):
        if not check_rotation_planarity(g, rs):
            continue
        if all(satisfies(g, rs, v, full[v]) for v in g.vertices):
            return True
    return False


class TestValidateConstraint:
    def test_trivial_is_valid(self):
        g = complete_graph(4)
        assert validate_constraint(trivial_constraint(g, 0), g, 0)

    def test_two_source_instance_invalid(self):
        g = complete_graph(4)
        inc = g.incident(0)
        t = fpq.pnode([fpq.leaf(e) for e in inc])
        inst = SimFpqInstance({"a": t, "b": fpq.pnode([fpq.leaf(9), fpq.leaf(8)])}, [])
        assert not validate_constraint(OneFixedConstraint(inst, "a"), g, 0)

    def test_wrong_leaves_invalid(self):
        g = complete_graph(4)
        c = trivial_constraint(g, 0)
        assert not validate_constraint(c, g, 1) or set(g.incident(0)) == set(
            g.incident(1)
        )


class TestSatisfies:
    def test_trivial_always(self):
        g = complete_graph(4)
        rng = random.Random(1)
        for rs in itertools.islice(all_rotation_systems(g), 10):
            assert satisfies(g, rs, 0, trivial_constraint(g, 0))

    def test_f_source_pins_one_order(self):
        g = complete_graph(4)
        inc = g.incident(0)
        c = fixed_order_constraint(g, 0, tuple(inc))
        hits = 0
        for rs in all_rotation_systems(g):
            want = fpq.canonical_cycle(tuple(inc)) == fpq.canonical_cycle(rs[0])
            assert satisfies(g, rs, 0, c) == want
            hits += want
        assert hits > 0


class TestPipeline:
    def test_k4_trivial_constraints(self):
        g = complete_graph(4)
        rot = test_one_fixed_planarity(g)
        assert rot is not INFEASIBLE
        assert check_rotation_planarity(g, rot)

    def test_c4_fixed_rotation(self):
        g = cycle_graph(4)
        rot0 = tuple(g.incident(0))
        c = fixed_order_constraint(g, 0, rot0)
        rot = test_one_fixed_planarity(g, {0: c})
        assert rot is not INFEASIBLE

    def test_forced_interleaving_infeasible(self):
        # P-bundle graph: the three branches between 0 and 1 must appear as
        # contiguous blocks at vertex 0; an F constraint interleaving them
        # contradicts planarity
        edges = [(0, 1), (0, 4), (4, 1), (0, 5), (5, 1),
                 (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
        g = Graph.build(range(6), edges)
        # E(0) = {0:direct(0,1), 1:(0,4), 3:(0,5), 5:(0,2), 6:(0,3)}
        inc = g.incident(0)
        assert inc == [0, 1, 3, 5, 6]
        bad = (0, 5, 1, 6, 3)  # bundle edges 0,1,3 separated by 5 and 6
        c = fixed_order_constraint(g, 0, bad)
        verdict = test_one_fixed_planarity(g, {0: c})
        assert verdict is INFEASIBLE
        assert not brute_force_verdict(g, {0: c})

    def test_not_biconnected_raises(self):
        path = Graph.build(range(3), [(0, 1), (1, 2)])
        with pytest.raises(NotBiconnected):
            test_one_fixed_planarity(path)

    def test_invalid_constraint_rejected(self):
        g = complete_graph(4)
        t = fpq.pnode([fpq.leaf(9)])  # wrong leaves entirely
        bad = OneFixedConstraint(SimFpqInstance({"a": fpq.leaf(9)}, []), "a")
        with pytest.raises(InvalidConstraint):
            test_one_fixed_planarity(g, {0: bad})


def random_constraint(rng, g, v):
    """Random valid 1-fixed constraint: a random source tree over E(v),
    sometimes with one child tree pinned by an arc."""
    from instance_gen import random_tree

    inc = list(g.incident(v))
    src = f"c{v}"
    tree = random_tree(rng, inc) if len(inc) > 1 else fpq.leaf(inc[0])
    trees = {src: tree}
    arcs = []
    if len(inc) >= 3 and rng.random() < 0.5:
        k = rng.randrange(2, len(inc) + 1)
        ids = [f"w{j}" for j in range(k)]
        child = random_tree(rng, ids)
        img = rng.sample(inc, k)
        trees["w"] = child
        arcs.append(Arc.make(src, "w", dict(zip(ids, img)), rng.random() < 0.5))
    inst = SimFpqInstance(trees, arcs)
    c = OneFixedConstraint(inst, src)
    if validate_constraint(c, g, v):
        return c
    return trivial_constraint(g, v)


class TestOracleEquivalence:
    def test_randomized(self):
        rng = random.Random(77)
        graphs = [
            complete_graph(4),
            cycle_graph(5),
            Graph.build([0, 1], [(0, 1)] * 3),
            Graph.build(range(5), [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0),
                                   (0, 2), (2, 4)]),
        ]
        for trial in range(40):
            g = graphs[trial % len(graphs)]
            constraints = {}
            for v in g.vertices:
                if rng.random() < 0.5:
                    constraints[v] = random_constraint(rng, g, v)
            got = test_one_fixed_planarity(g, constraints)
            want = brute_force_verdict(g, constraints)
            if got is INFEASIBLE:
                assert not want, f"trial {trial}"
            else:
                assert want, f"trial {trial}"
                assert check_rotation_planarity(g, got)
                full = dict(constraints)
                for v in g.vertices:
                    full.setdefault(v, trivial_constraint(g, v))
                for v in g.vertices:
                    assert satisfies(g, got, v, full[v])
