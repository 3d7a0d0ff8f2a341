"""Simultaneous FPQ-Ordering: fixes, fixedness, normalize, join, solvers."""

import random

import pytest

from hybridplan.errors import INCOMPATIBLE, INFEASIBLE, NotJoinable
from hybridplan import fpqtree as fpq
from hybridplan.fpqtree import parse_tree
from hybridplan.simfpq import (
    Arc,
    SimFpqInstance,
    enumerate_solutions,
    fixedness,
    fixes,
    instance_from_json,
    instance_to_json,
    is_k_fixed,
    is_normalized,
    join,
    legacy_fixedness,
    normalize,
    p_degree,
    solve,
    solve_exhaustive,
    validate_solution,
)
from instance_gen import joinable_copy, random_height1_instance, random_instance


def inst_of(nodes: dict, arcs) -> SimFpqInstance:
    return SimFpqInstance({k: parse_tree(v) for k, v in nodes.items()},
                          [Arc.make(*a) for a in arcs])


class TestFixes:
    def test_p_root_fixes_p_root(self):
        ta = parse_tree("P(a,b,c)")
        tb = parse_tree("P(x,y,z)")
        phi = {"x": "a", "y": "b", "z": "c"}
        assert fixes(ta, tb, phi, (), ())

    def test_two_leaf_head_fixes_nothing(self):
        ta = parse_tree("P(a,b,c)")
        tb = parse_tree("P(x,y)")
        assert not fixes(ta, tb, {"x": "a", "y": "b"}, (), ())

    def test_images_in_one_subtree_do_not_fix(self):
        ta = parse_tree("P(P(a,b,c), d, e)")
        tb = parse_tree("P(x,y,z)")
        phi = {"x": "a", "y": "b", "z": "c"}
        # all images under one component of the root: root not fixed
        assert not fixes(ta, tb, phi, (), ())
        assert fixes(ta, tb, phi, (0,), ())


class TestNormalize:
    def test_idempotent_on_normalized(self):
        inst = inst_of(
            {"a": "P(x,y,z)", "b": "P(u,v,w)"},
            [("a", "b", {"u": "x", "v": "y", "w": "z"})],
        )
        norm = normalize(inst)
        assert norm is not INCOMPATIBLE
        assert is_normalized(norm)
        norm2 = normalize(norm)
        for v in norm.trees:
            assert fpq.equivalent(norm.trees[v], norm2.trees[v])

    def test_f_tail_tightens_p_head(self):
        inst = inst_of(
            {"a": "F[x,y,z]", "b": "P(u,v,w)"},
            [("a", "b", {"u": "x", "v": "y", "w": "z"})],
        )
        norm = normalize(inst)
        assert fpq.equivalent(norm.trees["b"], parse_tree("F[u,v,w]"))

    def test_conflicting_f_orientations(self):
        inst = inst_of(
            {"a": "F[x,y,z]", "b": "F[u,w,v]"},
            [("a", "b", {"u": "x", "v": "y", "w": "z"})],
        )
        assert normalize(inst) is INCOMPATIBLE

    def test_reversing_arc_mirrors(self):
        inst = inst_of(
            {"a": "F[x,y,z]", "b": "P(u,v,w)"},
            [("a", "b", {"u": "x", "v": "y", "w": "z"}, True)],
        )
        norm = normalize(inst)
        # head must hold the mirrored tail family
        assert fpq.equivalent(norm.trees["b"], parse_tree("F[w,v,u]"))


class TestFixedness:
    def test_isolated_source_is_zero(self):
        inst = inst_of({"a": "P(x,y,z)"}, [])
        rep = fixedness(inst)
        assert rep.max_fixedness() == 0

    def test_child_fixing_source(self):
        inst = inst_of(
            {"a": "P(x,y,z)", "b": "P(u,v,w)"},
            [("a", "b", {"u": "x", "v": "y", "w": "z"})],
        )
        rep = fixedness(inst)
        assert rep.values[("a", ())] == 1  # one child fixes the source P
        assert rep.values[("b", ())] == 0  # omega 0, parent term 1-1

    def test_two_children_fixing_source(self):
        inst = inst_of(
            {"a": "P(x,y,z)", "b": "P(u,v,w)", "c": "P(p,q,r)"},
            [
                ("a", "b", {"u": "x", "v": "y", "w": "z"}),
                ("a", "c", {"p": "x", "q": "y", "r": "z"}),
            ],
        )
        rep = fixedness(inst)
        assert rep.values[("a", ())] == 2
        assert is_k_fixed(inst, 2) and not is_k_fixed(inst, 1)

    def test_empty_fi_gives_zero(self):
        # parent tree has no P-node at all: F_i empty for the sink P-node
        inst = inst_of(
            {"a": "Q[x,y,z]", "b": "P(u,v,w)"},
            [("a", "b", {"u": "x", "v": "y", "w": "z"})],
        )
        rep = fixedness(inst)
        assert rep.values[("b", ())] == 0

    def test_p_degree(self):
        inst = inst_of({"a": "P(x,y,z)"}, [])
        assert p_degree(inst) == 0
        chain = inst_of(
            {"a": "Q[x,y,z]", "b": "Q[u,v,w]"},
            [("a", "b", {"u": "x", "v": "y", "w": "z"})],
        )
        assert p_degree(chain) == 0  # no P-nodes anywhere
        two_arcs = inst_of(
            {"a": "P(x,y,z,t)", "b": "P(u,v,w)"},
            [
                ("a", "b", {"u": "x", "v": "y", "w": "z"}),
                ("a", "b", {"u": "y", "v": "z", "w": "t"}),
            ],
        )
        assert p_degree(two_arcs) == 2  # parallel arcs count separately


class TestJoin:
    def test_self_join_preserves_solutions(self):
        rng = random.Random(3)
        for _ in range(20):
            a = random_height1_instance(rng, require_one_fixed=False)
            b = SimFpqInstance(dict(a.trees), list(a.arcs))
            m = {s: s for s in a.sources()}
            j = join(a, b, m)
            if j is INCOMPATIBLE:
                continue
            assert enumerate_solutions(j) == enumerate_solutions(a)

    def test_incompatible_sources(self):
        a = inst_of({"s": "F[x,y,z]"}, [])
        b = inst_of({"t": "F[x,z,y]"}, [])
        assert join(a, b, {"s": "t"}) is INCOMPATIBLE

    def test_not_joinable(self):
        a = inst_of({"s": "P(x,y)"}, [])
        b = inst_of({"t": "P(x,z)"}, [])
        with pytest.raises(NotJoinable):
            join(a, b, {"s": "t"})

    def test_join_solution_sets_intersect(self):
        rng = random.Random(17)
        done = 0
        while done < 30:
            a = random_height1_instance(rng, n_sources=1, n_sinks=1,
                                        max_leaves=4, require_one_fixed=False)
            b, m = joinable_copy(rng, a, max_leaves=4)
            j = join(a, b, m)
            sol_a = enumerate_solutions(a)
            sol_b = {
                frozenset((m_inv[v], o) for v, o in s)
                for s in enumerate_solutions(b)
                for m_inv in [dict((w, u) for u, w in m.items())]
            }
            sol_b = {tuple(sorted(fs)) for fs in sol_b}
            want = sol_a & sol_b
            if j is INCOMPATIBLE:
                assert not want
            else:
                assert enumerate_solutions(j) == want
            done += 1


class TestSolvers:
    def test_isolated_sources(self):
        inst = inst_of({"a": "P(x,y,z)", "b": "F[u,v,w]"}, [])
        sol = solve(inst)
        assert sol is not INFEASIBLE
        assert validate_solution(inst, sol)

    def test_normalize_incompatible_infeasible(self):
        inst = inst_of(
            {"a": "F[x,y,z]", "b": "F[u,w,v]"},
            [("a", "b", {"u": "x", "v": "y", "w": "z"})],
        )
        assert solve(inst) is INFEASIBLE

    def test_agreement_with_exhaustive(self):
        rng = random.Random(11)
        for trial in range(150):
            inst = random_instance(rng, max_nodes=4, max_leaves=6)
            got = solve(inst)
            want = solve_exhaustive(inst)
            if want is INFEASIBLE:
                assert got is INFEASIBLE, instance_to_json(inst)
            else:
                assert got is not INFEASIBLE, instance_to_json(inst)
                assert validate_solution(inst, got), instance_to_json(inst)

    def test_solution_is_deterministic(self):
        rng = random.Random(4)
        inst = random_instance(rng, max_nodes=3, max_leaves=5)
        s1, s2 = solve(inst), solve(inst)
        assert s1 == s2


class TestLemmas:
    def test_normalization_never_increases_fixedness(self):
        rng = random.Random(23)
        checked = 0
        while checked < 60:
            inst = random_instance(rng, max_nodes=4, max_leaves=5)
            norm = normalize(inst)
            if norm is INCOMPATIBLE:
                continue
            before = fixedness(inst).max_fixedness()
            after = fixedness(norm).max_fixedness()
            assert after <= before, instance_to_json(inst)
            checked += 1

    def test_join_of_one_fixed_is_two_fixed(self):
        rng = random.Random(31)
        checked = 0
        while checked < 40:
            a = random_height1_instance(rng)
            b, m = joinable_copy(rng, a)
            if p_degree(b) > 2 or fixedness(b).max_fixedness() > 1:
                continue
            j = join(a, b, m)
            if j is INCOMPATIBLE:
                continue
            assert is_k_fixed(j, 2), instance_to_json(j)
            checked += 1

    def test_definition_agreement_on_normalized(self):
        rng = random.Random(41)
        checked = 0
        while checked < 60:
            inst = random_instance(rng, max_nodes=4, max_leaves=5)
            norm = normalize(inst)
            if norm is INCOMPATIBLE or not is_normalized(norm):
                continue
            new = fixedness(norm).values
            old = legacy_fixedness(norm)
            assert new == old, instance_to_json(norm)
            checked += 1

    def test_normalization_preserves_source_solutions(self):
        rng = random.Random(53)
        checked = 0
        while checked < 40:
            inst = random_instance(rng, max_nodes=3, max_leaves=5)
            norm = normalize(inst)
            if norm is INCOMPATIBLE:
                assert solve_exhaustive(inst) is INFEASIBLE
                checked += 1
                continue
            assert enumerate_solutions(inst) == enumerate_solutions(norm)
            checked += 1


class TestJson:
    def test_roundtrip(self):
        inst = inst_of(
            {"a": "P(x, Q[y, z])", "b": "F[u, v, w]"},
            [("a", "b", {"u": "x", "v": "y", "w": "z"}, True)],
        )
        data = instance_to_json(inst)
        back = instance_from_json(data)
        assert instance_to_json(back) == data
