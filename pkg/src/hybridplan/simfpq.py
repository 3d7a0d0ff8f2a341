"""Simultaneous FPQ-Ordering instances and their solvers.

An instance is a DAG whose nodes carry FPQ-trees; every arc (tail, head)
maps the head's leaves injectively into the tail's and may be flagged
reversing.  A solution picks one cyclic order per node so that each tail
order extends the mapped (possibly reversed) head order.

``solve`` decomposes arc constraints into per-node arrangement ties (this
needs each head node to fix exactly one tail node, which normalization
guarantees) and searches the resulting CSP; ``solve_exhaustive`` is the
independent oracle that enumerates whole order tuples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import permutations

from .errors import (
    INCOMPATIBLE,
    INFEASIBLE,
    BudgetExceeded,
    NotJoinable,
    TooLarge,
)
from . import fpqtree as fpq
from .fpqtree import Node, canonical_cycle, inner_nodes, leaves, node_at

# ---------------------------------------------------------------------------
# Instances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Arc:
    tail: str
    head: str
    phi: tuple[tuple[object, object], ...]  # (head leaf, tail leaf) pairs
    reversing: bool = False

    @property
    def phi_map(self) -> dict:
        return dict(self.phi)

    @staticmethod
    def make(tail, head, phi: dict, reversing=False) -> "Arc":
        items = tuple(sorted(phi.items(), key=lambda kv: fpq._leaf_key(kv[0])))
        return Arc(tail, head, items, reversing)


@dataclass
class SimFpqInstance:
    trees: dict[str, Node]
    arcs: list[Arc]

    def __post_init__(self):
        for arc in self.arcs:
            phi = arc.phi_map
            head_leaves = leaves(self.trees[arc.head])
            tail_leaves = leaves(self.trees[arc.tail])
            if set(phi) != head_leaves:
                raise ValueError(f"phi domain is not L({arc.head})")
            img = list(phi.values())
            if len(set(img)) != len(img) or not set(img) <= tail_leaves:
                raise ValueError(f"phi of {arc.tail}->{arc.head} not injective")
        self.topo_order()  # raises on cycles

    def sources(self) -> list[str]:
        heads = {a.head for a in self.arcs}
        return [v for v in sorted(self.trees) if v not in heads]

    def parents(self, v: str) -> list[str]:
        return sorted({a.tail for a in self.arcs if a.head == v})

    def children(self, v: str) -> list[str]:
        return sorted({a.head for a in self.arcs if a.tail == v})

    def in_arcs(self, v: str) -> list[Arc]:
        return [a for a in self.arcs if a.head == v]

    def topo_order(self) -> list[str]:
        indeg = {v: 0 for v in self.trees}
        for a in self.arcs:
            indeg[a.head] += 1
        frontier = sorted(v for v, d in indeg.items() if d == 0)
        order = []
        while frontier:
            v = frontier.pop(0)
            order.append(v)
            for a in self.arcs:
                if a.tail == v:
                    indeg[a.head] -= 1
                    if indeg[a.head] == 0 and a.head not in order:
                        if a.head not in frontier:
                            frontier.append(a.head)
            frontier.sort()
        if len(order) != len(self.trees):
            raise ValueError("instance is not acyclic")
        return order

    def height(self) -> int:
        depth = {v: 0 for v in self.sources()}
        for v in self.topo_order():
            for a in self.in_arcs(v):
                depth[v] = max(depth.get(v, 0), depth[a.tail] + 1)
            depth.setdefault(v, 0)
        return max(depth.values(), default=0)


#: node id -> canonical cyclic order of that node's leaves
Solution = dict[str, tuple]


def order_extends(tail_order, phi: dict, head_order, reversing: bool) -> bool:
    oh = tuple(reversed(head_order)) if reversing else tuple(head_order)
    mapped = tuple(phi[x] for x in oh)
    image = set(mapped)
    restr = tuple(x for x in tail_order if x in image)
    return canonical_cycle(restr) == canonical_cycle(mapped)


def validate_solution(inst: SimFpqInstance, sol: Solution) -> bool:
    for v, tree in inst.trees.items():
        if v not in sol:
            return False
        if len(leaves(tree)) <= 9 and sol[v] not in fpq.orders(tree):
            return False
        if set(sol[v]) != leaves(tree):
            return False
    return all(
        order_extends(sol[a.tail], a.phi_map, sol[a.head], a.reversing)
        for a in inst.arcs
    )


# ---------------------------------------------------------------------------
# The fixed-by relation
# ---------------------------------------------------------------------------


def _component_of(tree: Node, path: tuple) -> dict:
    """leaf -> component index around the node at ``path``; children are
    0..k-1, the parent side is -1."""
    node = node_at(tree, path)
    comp = {}
    for i, c in enumerate(node.children):
        for x in leaves(c):
            comp[x] = i
    for x in leaves(tree) - leaves(node):
        comp[x] = -1
    return comp


def _matching_at_least(pairs: set[tuple], k: int) -> bool:
    """Max bipartite matching of the distinct (a, b) pairs reaches k."""
    adj: dict = {}
    for a, b in pairs:
        adj.setdefault(a, set()).add(b)
    match_b: dict = {}

    def augment(a, seen):
        for b in adj.get(a, ()):
            if b in seen:
                continue
            seen.add(b)
            if b not in match_b or augment(match_b[b], seen):
                match_b[b] = a
                return True
        return False

    size = 0
    for a in adj:
        if augment(a, set()):
            size += 1
            if size >= k:
                return True
    return False


def fixes(tail_tree: Node, head_tree: Node, phi: dict,
          mu_path: tuple, nu_path: tuple) -> bool:
    """True iff the head node at nu_path fixes the tail node at mu_path:
    three head leaves pairwise split at both nodes (through phi)."""
    comp_head = _component_of(head_tree, nu_path)
    comp_tail = _component_of(tail_tree, mu_path)
    pairs = {(comp_head[x], comp_tail[phi[x]]) for x in comp_head}
    return _matching_at_least(pairs, 3)


def arc_fixes(inst: SimFpqInstance, arc: Arc, mu_path: tuple, nu_path: tuple) -> bool:
    return fixes(inst.trees[arc.tail], inst.trees[arc.head],
                 arc.phi_map, mu_path, nu_path)


def _inner_paths(tree: Node, kind=None) -> list[tuple]:
    return [p for p, n in inner_nodes(tree) if kind is None or n.kind == kind]


# ---------------------------------------------------------------------------
# Fixedness
# ---------------------------------------------------------------------------


@dataclass
class FixednessReport:
    """Per P-node fixedness per Definition-style recurrence."""

    values: dict[tuple[str, tuple], int]
    omegas: dict[tuple[str, tuple], int]
    parent_terms: dict[tuple[str, tuple], dict[str, int]]

    def max_fixedness(self) -> int:
        return max(self.values.values(), default=0)


def _omega(inst: SimFpqInstance, v: str, mu_path: tuple) -> int:
    """Number of child nodes of v containing a node that fixes mu."""
    fixing_children = set()
    for arc in inst.arcs:
        if arc.tail != v or arc.head in fixing_children:
            continue
        head_tree = inst.trees[arc.head]
        if any(arc_fixes(inst, arc, mu_path, nu) for nu in _inner_paths(head_tree)):
            fixing_children.add(arc.head)
    return len(fixing_children)


def fixedness(inst: SimFpqInstance) -> FixednessReport:
    """Fixedness of every P-node, evaluated topologically from the sources.

    For non-sources with parents T_1..T_p and F_i the P-nodes of T_i fixed
    by mu: zero if some F_i is empty, else omega + sum_i max(fixed - 1).
    """
    values: dict = {}
    omegas: dict = {}
    terms: dict = {}
    src = set(inst.sources())
    for v in inst.topo_order():
        tree = inst.trees[v]
        for mu in _inner_paths(tree, fpq.P):
            om = _omega(inst, v, mu)
            omegas[(v, mu)] = om
            if v in src:
                values[(v, mu)] = om
                terms[(v, mu)] = {}
                continue
            per_parent: dict[str, int] = {}
            dead = False
            for p in inst.parents(v):
                fi = []
                for arc in inst.in_arcs(v):
                    if arc.tail != p:
                        continue
                    for mp in _inner_paths(inst.trees[p], fpq.P):
                        if arc_fixes(inst, arc, mp, mu):
                            fi.append(values[(p, mp)])
                if not fi:
                    dead = True
                    break
                per_parent[p] = max(f - 1 for f in fi)
            if dead:
                values[(v, mu)] = 0
                terms[(v, mu)] = {}
            else:
                values[(v, mu)] = om + sum(per_parent.values())
                terms[(v, mu)] = per_parent
    return FixednessReport(values, omegas, terms)


def legacy_fixedness(inst: SimFpqInstance) -> dict[tuple[str, tuple], int]:
    """Fixedness via the original recurrence on normalized instances: use
    the unique internal node of each parent fixed by mu; a non-P unique
    node contributes no freedom (value 0 for mu)."""
    values: dict = {}
    src = set(inst.sources())
    for v in inst.topo_order():
        tree = inst.trees[v]
        for mu in _inner_paths(tree, fpq.P):
            om = _omega(inst, v, mu)
            if v in src:
                values[(v, mu)] = om
                continue
            total = om
            dead = False
            for p in inst.parents(v):
                fixed_nodes = set()
                for arc in inst.in_arcs(v):
                    if arc.tail != p:
                        continue
                    for mp in _inner_paths(inst.trees[p]):
                        if arc_fixes(inst, arc, mp, mu):
                            fixed_nodes.add(mp)
                p_vals = [
                    values[(p, mp)]
                    for mp in fixed_nodes
                    if node_at(inst.trees[p], mp).kind == fpq.P
                ]
                if not p_vals:
                    dead = True
                    break
                total += max(p_vals) - 1
            values[(v, mu)] = 0 if dead else total
    return values


def is_k_fixed(inst: SimFpqInstance, k: int) -> bool:
    return fixedness(inst).max_fixedness() <= k


def p_degree(inst: SimFpqInstance) -> int:
    """Max number of incoming arcs over nodes whose tree has a P-node."""
    out = 0
    for v, tree in inst.trees.items():
        if _inner_paths(tree, fpq.P):
            out = max(out, len(inst.in_arcs(v)))
    return out


def is_normalized(inst: SimFpqInstance) -> bool:
    """Each arc head node fixes exactly one tail node."""
    for arc in inst.arcs:
        head_tree = inst.trees[arc.head]
        tail_paths = _inner_paths(inst.trees[arc.tail])
        for nu in _inner_paths(head_tree):
            n = sum(1 for mp in tail_paths if arc_fixes(inst, arc, mp, nu))
            if n != 1:
                return False
    return True


# ---------------------------------------------------------------------------
# Normalization and join
# ---------------------------------------------------------------------------


def _relabel(t: Node, mapping: dict) -> Node:
    if t.is_leaf():
        return fpq.leaf(mapping[t.leaf])
    return Node(t.kind, tuple(_relabel(c, mapping) for c in t.children),
                origin=t.origin)


def normalize(inst: SimFpqInstance):
    """Replace each head by its intersection with the projected (and, on
    reversing arcs, mirrored) tail, processing arcs top-down."""
    trees = dict(inst.trees)
    pos = {v: i for i, v in enumerate(inst.topo_order())}
    arcs = sorted(
        range(len(inst.arcs)),
        key=lambda i: (pos[inst.arcs[i].tail], pos[inst.arcs[i].head], i),
    )
    for i in arcs:
        arc = inst.arcs[i]
        phi = arc.phi_map
        projected = fpq.project(trees[arc.tail], set(phi.values()))
        inv = {tail_leaf: head_leaf for head_leaf, tail_leaf in phi.items()}
        projected = _relabel(projected, inv)
        if arc.reversing:
            projected = fpq.mirror(projected)
        res = fpq.intersect(projected, trees[arc.head])
        if res is INCOMPATIBLE:
            return INCOMPATIBLE
        trees[arc.head] = res[0]
    return SimFpqInstance(trees, list(inst.arcs))


def join(a: SimFpqInstance, b: SimFpqInstance, matching: dict):
    """Join DAG: replace matched sources by their intersections and merge.

    ``matching`` maps each source id of ``a`` to a source id of ``b``; the
    merged node keeps a's id.  Returns INCOMPATIBLE when some intersection
    is empty.
    """
    sa, sb = a.sources(), b.sources()
    if sorted(matching) != sorted(sa) or sorted(matching.values()) != sorted(sb):
        raise NotJoinable("matching is not a source bijection")
    for s in sa:
        if leaves(a.trees[s]) != leaves(b.trees[matching[s]]):
            raise NotJoinable(f"leaf sets differ on {s}/{matching[s]}")

    trees: dict[str, Node] = {}
    for v, t in a.trees.items():
        trees[v] = t
    rename: dict[str, str] = {matching[s]: s for s in sa}
    for v, t in b.trees.items():
        if v in rename:
            continue
        new = v
        while new in trees:
            new = new + "'"
        rename[v] = new
        trees[new] = t
    for s in sa:
        res = fpq.intersect(a.trees[s], b.trees[matching[s]])
        if res is INCOMPATIBLE:
            return INCOMPATIBLE
        trees[s] = res[0]
    arcs = list(a.arcs)
    for arc in b.arcs:
        arcs.append(Arc(rename[arc.tail], rename[arc.head], arc.phi, arc.reversing))
    return SimFpqInstance(trees, arcs)


# ---------------------------------------------------------------------------
# Exhaustive solver (oracle)
# ---------------------------------------------------------------------------


def solve_exhaustive(inst: SimFpqInstance, leaf_limit: int = 7, node_limit: int = 6):
    """Enumerate per-node orders (smallest-first), discarding a partial
    tuple as soon as some arc between assigned nodes fails; exact but
    exponential, guarded by the stated budget."""
    if len(inst.trees) > node_limit:
        raise TooLarge(f"more than {node_limit} nodes")
    for v, t in inst.trees.items():
        if len(leaves(t)) > leaf_limit:
            raise TooLarge(f"tree {v} has more than {leaf_limit} leaves")
    names = sorted(inst.trees)
    choice_lists = {v: sorted(fpq.orders(inst.trees[v])) for v in names}
    sol: dict = {}

    def rec(i: int):
        if i == len(names):
            return True
        v = names[i]
        for order in choice_lists[v]:
            sol[v] = order
            ok = all(
                order_extends(sol[a.tail], a.phi_map, sol[a.head], a.reversing)
                for a in inst.arcs
                if (a.tail == v and a.head in sol) or (a.head == v and a.tail in sol)
            )
            if ok and rec(i + 1):
                return True
        del sol[v]
        return False

    if rec(0):
        return dict(sol)
    return INFEASIBLE


def enumerate_solutions(inst: SimFpqInstance, source_restricted: bool = True,
                        leaf_limit: int = 8, node_limit: int = 12) -> set:
    """All (source-restricted) solutions as frozensets of (node, order)."""
    if len(inst.trees) > node_limit:
        raise TooLarge(f"more than {node_limit} nodes")
    for v, t in inst.trees.items():
        if len(leaves(t)) > leaf_limit:
            raise TooLarge(f"tree {v} has more than {leaf_limit} leaves")
    names = inst.topo_order()
    src = set(inst.sources())
    out: set = set()

    def rec(i: int, sol: dict):
        if i == len(names):
            keep = tuple(
                sorted((v, o) for v, o in sol.items() if not source_restricted
                       or v in src)
            )
            out.add(keep)
            return
        v = names[i]
        for order in sorted(fpq.orders(inst.trees[v])):
            sol[v] = order
            if all(
                order_extends(sol[a.tail], a.phi_map, sol[a.head], a.reversing)
                for a in inst.arcs
                if a.head == v and a.tail in sol
            ):
                rec(i + 1, sol)
        del sol[v]

    rec(0, {})
    return out


# ---------------------------------------------------------------------------
# Constraint-propagation solver
# ---------------------------------------------------------------------------


class _CspUnsupported(Exception):
    pass


_DOMAIN_CAP = 720  # max enumerated arrangements of one P-node


def _domain_size(tree: Node, path: tuple) -> int:
    node = node_at(tree, path)
    k = len(node.children)
    if node.kind == fpq.P:
        return math.factorial(k if path else k - 1)
    return 2 if node.kind == fpq.Q else 1


def _arrangement_domain(tree: Node, path: tuple) -> list[tuple]:
    """Cyclic arrangements of a node's components.

    Components are child indices; the parent side (-1) is present for
    non-root nodes.  Arrangements are tuples in cyclic reading order,
    anchored at the parent side (or at component 0 for roots) so each
    cyclic class appears once.
    """
    node = node_at(tree, path)
    k = len(node.children)
    if node.kind == fpq.P:
        if path:
            return [(-1,) + p for p in permutations(range(k))]
        return [(0,) + p for p in permutations(range(1, k))]
    fwd = tuple(range(k))
    rev = tuple(reversed(range(k)))
    if path:
        doms = [(-1,) + fwd]
        if node.kind == fpq.Q:
            doms.append((-1,) + rev)
    else:
        doms = [fwd]
        if node.kind == fpq.Q:
            doms.append((0,) + tuple(reversed(range(1, k))))
    return doms


def _canonical_arrangement(tree: Node, path: tuple) -> tuple:
    node = node_at(tree, path)
    k = len(node.children)
    return ((-1,) if path else ()) + tuple(range(k))


def _pair_ok(arr_tail, arr_head, gamma: dict, reversing: bool) -> bool:
    """Check one arrangement tie: along the tail node's cyclic component
    order, the head components' image groups must be contiguous and appear
    in the head node's (possibly reversed) component order."""
    hit = {}
    for hc, tcs in gamma.items():
        for tc in tcs:
            hit[tc] = hc
    seq = [hit[tc] for tc in arr_tail if tc in hit]
    if not seq:
        return True
    # cyclic run-length compression
    labels = []
    for x in seq:
        if not labels or labels[-1] != x:
            labels.append(x)
    if len(labels) > 1 and labels[0] == labels[-1]:
        labels[0:1] = []
    if len(set(labels)) != len(labels):
        return False
    head_seq = tuple(reversed(arr_head)) if reversing else tuple(arr_head)
    if len(labels) != len(head_seq):
        return False
    return canonical_cycle(tuple(labels)) == canonical_cycle(head_seq)


def _build_csp(inst: SimFpqInstance):
    """Variables and pairwise arrangement ties for a normalized instance.

    Head nodes with at most two components are skipped: they can never be
    the median of a leaf triple, so they impose nothing.
    """
    variables: list[tuple[str, tuple]] = []
    for v, tree in inst.trees.items():
        for path in _inner_paths(tree):
            variables.append((v, path))

    constraints = []  # (tail var, head var, gamma, reversing)
    for arc in inst.arcs:
        head_tree, tail_tree = inst.trees[arc.head], inst.trees[arc.tail]
        phi = arc.phi_map
        tail_inner = _inner_paths(tail_tree)
        for nu in _inner_paths(head_tree):
            n_comps = len(node_at(head_tree, nu).children) + (1 if nu else 0)
            if n_comps <= 2:
                continue
            fixed = [mp for mp in tail_inner
                     if fixes(tail_tree, head_tree, phi, mp, nu)]
            if len(fixed) != 1:
                raise _CspUnsupported("head node without a unique fixed node")
            mu = fixed[0]
            comp_head = _component_of(head_tree, nu)
            comp_tail = _component_of(tail_tree, mu)
            gamma: dict = {}
            for x, hc in comp_head.items():
                gamma.setdefault(hc, set()).add(comp_tail[phi[x]])
            classes = list(gamma.values())
            for i in range(len(classes)):
                for j in range(i + 1, len(classes)):
                    if classes[i] & classes[j]:
                        raise _CspUnsupported("overlapping component images")
            constraints.append(((arc.tail, mu), (arc.head, nu), gamma,
                                arc.reversing))
    return variables, constraints


def _merge_cyclic_orders(seq1: tuple, seq2: tuple):
    """One cyclic order extending two cyclic sub-orders, or None.  Two
    sub-orders merge exactly when they agree on their intersection."""
    common = [x for x in seq1 if x in set(seq2)]
    if len(common) != len([x for x in seq2 if x in set(seq1)]):
        return None
    if len(common) >= 3:
        pos1 = {x: i for i, x in enumerate(seq1)}
        r1 = tuple(sorted(common, key=lambda x: pos1[x]))
        start = seq2.index(r1[0])
        rot2 = seq2[start:] + seq2[:start]
        r2 = tuple(x for x in rot2 if x in set(common))
        if fpq.canonical_cycle(r1) != fpq.canonical_cycle(r2):
            return None
    if not common:
        return tuple(seq1) + tuple(seq2)
    # insert seq2's extra elements after their predecessor among the commons
    out = list(seq1)
    start = seq2.index(common[0])
    rot2 = list(seq2[start:] + seq2[:start])
    anchor = common[0]
    for x in rot2[1:]:
        if x in set(out):
            anchor = x
            continue
        out.insert(out.index(anchor) + 1, x)
        anchor = x
    return tuple(out)


def _search_csp(inst: SimFpqInstance, variables, constraints):
    by_var: dict = {}
    for idx, (tv, hv, _, _) in enumerate(constraints):
        by_var.setdefault(tv, []).append(idx)
        by_var.setdefault(hv, []).append(idx)

    sizes = {v: _domain_size(inst.trees[v[0]], v[1]) for v in variables}
    small = sorted(v for v in variables
                   if v in by_var and sizes[v] <= _DOMAIN_CAP)
    big = sorted(v for v in variables
                 if v in by_var and sizes[v] > _DOMAIN_CAP)
    free = sorted(v for v in variables if v not in by_var)

    domains = {v: _arrangement_domain(inst.trees[v[0]], v[1]) for v in small}

    pair_cache: list[dict] = [dict() for _ in constraints]

    def check(idx: int, a, b) -> bool:
        key = (a, b)
        cache = pair_cache[idx]
        hit = cache.get(key)
        if hit is None:
            tv, hv, gamma, rev = constraints[idx]
            hit = cache[key] = _pair_ok(a, b, gamma, rev)
        return hit

    # arc-consistency over the enumerated variables
    changed = True
    while changed:
        changed = False
        for idx, (tv, hv, gamma, rev) in enumerate(constraints):
            if tv not in domains or hv not in domains:
                continue
            for var, other, as_tail in ((tv, hv, True), (hv, tv, False)):
                kept = []
                for x in domains[var]:
                    for y in domains[other]:
                        a, b = (x, y) if as_tail else (y, x)
                        if check(idx, a, b):
                            kept.append(x)
                            break
                if len(kept) != len(domains[var]):
                    domains[var] = kept
                    changed = True
            if not domains[tv] or not domains[hv]:
                return None

    # search in breadth-first order along the constraint graph with forward
    # checking, so chains and rings of ties propagate instead of thrashing
    order: list = []
    seen: set = set()
    for seed in small:
        if seed in seen:
            continue
        queue = [seed]
        seen.add(seed)
        while queue:
            v = queue.pop(0)
            order.append(v)
            for idx in by_var[v]:
                o = _other_end(constraints[idx], v)
                if o in domains and o not in seen:
                    seen.add(o)
                    queue.append(o)

    assignment: dict = {}

    def consistent(var, value):
        for idx in by_var.get(var, ()):
            tv, hv, _, _ = constraints[idx]
            other = hv if var == tv else tv
            if other in assignment:
                a = value if var == tv else assignment[other]
                b = assignment[other] if var == tv else value
                if not check(idx, a, b):
                    return False
        return True

    def backtrack(i: int) -> bool:
        if i == len(order):
            return True
        var = order[i]
        for value in domains[var]:
            if not consistent(var, value):
                continue
            assignment[var] = value
            pruned = []
            dead = False
            for idx in by_var[var]:
                tv, hv, _, _ = constraints[idx]
                other = hv if var == tv else tv
                if other in assignment or other not in domains:
                    continue
                if var == tv:
                    kept = [y for y in domains[other] if check(idx, value, y)]
                else:
                    kept = [y for y in domains[other] if check(idx, y, value)]
                if len(kept) != len(domains[other]):
                    pruned.append((other, domains[other]))
                    domains[other] = kept
                    if not kept:
                        dead = True
                        break
            if not dead and backtrack(i + 1):
                return True
            for other, dom in pruned:
                domains[other] = dom
            del assignment[var]
        return False

    if not backtrack(0):
        return None

    # large P-nodes: derive arrangements by propagating the cyclic orders
    # their ties impose; the tie structure among them must be acyclic, and
    # a failed merge escalates to the fallback solver rather than deciding
    remaining = list(big)
    guard = 0
    while remaining:
        guard += 1
        if guard > 10 * len(big) + 10:
            raise _CspUnsupported("large-node propagation did not converge")
        remaining.sort(key=lambda v: -sum(
            1 for idx in by_var[v]
            if _other_end(constraints[idx], v) in assignment
        ))
        var = remaining.pop(0)
        node = node_at(inst.trees[var[0]], var[1])
        comps = ([-1] if var[1] else []) + list(range(len(node.children)))
        requirements = []
        for idx in by_var[var]:
            tv, hv, gamma, rev = constraints[idx]
            other = hv if var == tv else tv
            if other not in assignment:
                continue
            if any(len(ms) != 1 for ms in gamma.values()):
                raise _CspUnsupported("grouped tie on a large node")
            if var == tv:
                head_arr = assignment[other]
                if rev:
                    head_arr = tuple(reversed(head_arr))
                requirements.append(
                    tuple(next(iter(gamma[hc])) for hc in head_arr
                          if hc in gamma)
                )
            else:
                inv = {next(iter(ms)): hc for hc, ms in gamma.items()}
                tail_arr = assignment[other]
                seq = tuple(inv[tc] for tc in tail_arr if tc in inv)
                if rev:
                    seq = tuple(reversed(seq))
                requirements.append(seq)
        merged: tuple = ()
        for req in requirements:
            res = _merge_cyclic_orders(merged, req) if merged else req
            if res is None:
                raise _CspUnsupported("conflicting ties on a large node")
            merged = res
        rest = [c for c in comps if c not in set(merged)]
        value = tuple(merged) + tuple(rest)
        if node.kind != fpq.P:
            raise _CspUnsupported("large non-P node")
        assignment[var] = value

    for var in free:
        assignment[var] = _canonical_arrangement(inst.trees[var[0]], var[1])
    return assignment


def _other_end(constraint, var):
    tv, hv, _, _ = constraint
    return hv if var == tv else tv


def _read_order(tree: Node, node_id: str, assignment: dict) -> tuple:
    def rec(path: tuple, node: Node) -> tuple:
        if node.is_leaf():
            return (node.leaf,)
        arr = assignment[(node_id, path)]
        if path:  # rotate so the parent side (-1) leads, then drop it
            i = arr.index(-1)
            arr = arr[i + 1 :] + arr[:i]
        out: tuple = ()
        for ci in arr:
            out += rec(path + (ci,), node.children[ci])
        return out

    return canonical_cycle(rec((), tree))


def solve(inst: SimFpqInstance):
    """A valid Solution or INFEASIBLE.

    Normalizes, then solves the per-node arrangement CSP; on instances the
    decomposition cannot handle it falls back to bounded search and raises
    BudgetExceeded beyond the fallback budget.
    """
    norm = normalize(inst)
    if norm is INCOMPATIBLE:
        return INFEASIBLE
    return solve_normalized(norm, inst)


def solve_normalized(norm: SimFpqInstance, original: SimFpqInstance | None = None):
    """Solve an already-normalized instance (see :func:`solve`)."""
    original = original if original is not None else norm
    try:
        variables, constraints = _build_csp(norm)
        assignment = _search_csp(norm, variables, constraints)
        if assignment is None:
            return INFEASIBLE
        sol = {v: _read_order(t, v, assignment) for v, t in norm.trees.items()}
        if not validate_solution(original, sol):
            raise _CspUnsupported("assignment failed validation")
        return sol
    except _CspUnsupported:
        return _solve_fallback(norm)


def _solve_fallback(inst: SimFpqInstance, leaf_limit: int = 8,
                    node_limit: int = 10):
    """Backtracking over per-node orders in topological order."""
    if len(inst.trees) > node_limit:
        raise BudgetExceeded("fallback solver: too many nodes")
    for v, t in inst.trees.items():
        if len(leaves(t)) > leaf_limit:
            raise BudgetExceeded("fallback solver: tree too large")
    names = inst.topo_order()
    sol: dict = {}

    def rec(i: int):
        if i == len(names):
            return True
        v = names[i]
        for order in sorted(fpq.orders(inst.trees[v])):
            sol[v] = order
            if all(
                order_extends(sol[a.tail], a.phi_map, sol[a.head], a.reversing)
                for a in inst.arcs
                if a.head == v and a.tail in sol
            ) and all(
                order_extends(sol[a.tail], a.phi_map, sol[a.head], a.reversing)
                for a in inst.arcs
                if a.tail == v and a.head in sol
            ):
                if rec(i + 1):
                    return True
        del sol[v]
        return False

    if rec(0):
        return dict(sol)
    return INFEASIBLE


# ---------------------------------------------------------------------------
# JSON fixtures
# ---------------------------------------------------------------------------


def instance_from_json(data: dict) -> SimFpqInstance:
    trees = {k: fpq.parse_tree(v) for k, v in data["nodes"].items()}

    def fix_leaf(x, tree_leaves):
        if x in tree_leaves:
            return x
        xi = int(x)
        return xi

    arcs = []
    for a in data["arcs"]:
        head_leaves = leaves(trees[a["head"]])
        tail_leaves = leaves(trees[a["tail"]])
        phi = {}
        for k, v in a["phi"].items():
            hk = k if k in head_leaves else int(k)
            tv = v if v in tail_leaves else int(v)
            phi[hk] = tv
        arcs.append(Arc.make(a["tail"], a["head"], phi, bool(a.get("reversing"))))
    return SimFpqInstance(trees, arcs)


def instance_to_json(inst: SimFpqInstance) -> dict:
    return {
        "nodes": {k: fpq.format_tree(t) for k, t in sorted(inst.trees.items())},
        "arcs": [
            {
                "tail": a.tail,
                "head": a.head,
                "phi": {str(k): v for k, v in a.phi},
                "reversing": a.reversing,
            }
            for a in inst.arcs
        ],
    }
