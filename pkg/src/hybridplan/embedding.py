"""Embedding DAGs: all planar embeddings of a biconnected graph as a
Simultaneous FPQ-Ordering instance.

One source per vertex (its embedding tree over the incident edge ids),
plus one shared child per P-skeleton (a P-node tying the two poles' branch
orders, one arc reversing) and one shared 3-leaf Q child per R-skeleton
(tying the reflection state of every skeleton vertex).  Solutions restricted
to the sources correspond bijectively to planar rotation systems.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidSolution, NotPlanar
from . import fpqtree as fpq
from .fpqtree import Node
from .graph import Graph, RotationSystem, planar_embedding
from .simfpq import Arc, SimFpqInstance, validate_solution
from .spqr import SpqrTree, spqr_decompose


@dataclass
class EmbeddingDag:
    graph: Graph
    spqr: SpqrTree
    instance: SimFpqInstance
    source_of: dict[int, str]  # vertex -> node id

    def vertex_restriction(self, v: int) -> SimFpqInstance:
        """D(v): the source of v together with its children and only the
        arcs leaving that source."""
        src = self.source_of[v]
        arcs = [a for a in self.instance.arcs if a.tail == src]
        keep = {src} | {a.head for a in arcs}
        trees = {k: t for k, t in self.instance.trees.items() if k in keep}
        return SimFpqInstance(trees, arcs)


# ---------------------------------------------------------------------------
# Reference embeddings and branch expansion
# ---------------------------------------------------------------------------


def _skeleton_graph(sk) -> Graph:
    return Graph(tuple(sorted(sk.vertices)),
                 tuple((e.eid, e.u, e.v) for e in sk.edges))


def _reference_rotations(spqr: SpqrTree) -> dict[int, RotationSystem]:
    refs = {}
    for sid, sk in spqr.skeletons.items():
        if sk.kind != "R":
            continue
        rot = planar_embedding(_skeleton_graph(sk))
        if rot is None:
            raise NotPlanar(f"R-skeleton {sid} is not planar")
        refs[sid] = rot
    return refs


def _real_edges_at(spqr: SpqrTree, v: int, sid: int, eid: int,
                   cache: dict) -> list[int]:
    """Real edge ids at v inside the branch that skeleton edge ``eid`` of
    skeleton ``sid`` stands for."""
    key = (v, sid, eid)
    if key in cache:
        return cache[key]
    edge = next(e for e in spqr.skeletons[sid].edges if e.eid == eid)
    if not edge.virtual:
        out = [eid] if v in (edge.u, edge.v) else []
    else:
        a, b = spqr.twins[eid]
        nxt = b if a == sid else a
        out = []
        for e in spqr.skeletons[nxt].edges:
            if e.eid == eid:
                continue
            if v in (e.u, e.v):
                out.extend(_real_edges_at(spqr, v, nxt, e.eid, cache))
    cache[key] = out
    return out


def _rep_at(spqr, v, sid, eid, cache) -> int:
    reals = _real_edges_at(spqr, v, sid, eid, cache)
    if not reals:
        raise InvalidSolution(f"branch {eid} has no real edge at {v}")
    return min(reals)


# ---------------------------------------------------------------------------
# Embedding trees
# ---------------------------------------------------------------------------


def _build_vertex_tree(spqr, refs, v, sid, entry, cache) -> Node:
    sk = spqr.skeletons[sid]

    def expand(e) -> Node:
        if not e.virtual:
            return fpq.leaf(e.eid)
        a, b = spqr.twins[e.eid]
        nxt = b if a == sid else a
        return _build_vertex_tree(spqr, refs, v, nxt, e.eid, cache)

    inc = [e for e in sk.incident(v) if e.eid != entry]
    if sk.kind == "R":
        rot = list(refs[sid][v])
        if entry is not None:
            i = rot.index(entry)
            rot = rot[i + 1 :] + rot[:i]
        kids = [expand(next(e for e in inc if e.eid == eid)) for eid in rot]
        return fpq.qnode(kids) if len(kids) >= 2 else kids[0]
    kids = [expand(e) for e in sorted(inc, key=lambda e: e.eid)]
    if len(kids) == 1:
        return kids[0]
    return fpq.pnode(kids)


def embedding_tree(g: Graph, spqr: SpqrTree, v: int) -> Node:
    """Tree over E(v) whose orders are exactly the rotations at v over all
    planar embeddings of g."""
    refs = _reference_rotations(spqr)
    cache: dict = {}
    sids = spqr.skeletons_with_vertex(v)
    root_sid = min(sids)
    return fpq.simplify(_build_vertex_tree(spqr, refs, v, root_sid, None, cache))


# ---------------------------------------------------------------------------
# The DAG
# ---------------------------------------------------------------------------


def build_embedding_dag(g: Graph) -> EmbeddingDag:
    spqr = spqr_decompose(g)
    refs = _reference_rotations(spqr)
    cache: dict = {}

    trees: dict[str, Node] = {}
    source_of: dict[int, str] = {}
    for v in g.vertices:
        name = f"v{v}"
        source_of[v] = name
        sids = spqr.skeletons_with_vertex(v)
        trees[name] = fpq.simplify(
            _build_vertex_tree(spqr, refs, v, min(sids), None, cache)
        )

    arcs: list[Arc] = []
    for sid, sk in sorted(spqr.skeletons.items()):
        if sk.kind == "P":
            u, w = sorted(sk.vertices)
            branch_ids = sorted(e.eid for e in sk.edges)
            child = f"P{sid}"
            trees[child] = fpq.pnode([fpq.leaf(b) for b in branch_ids])
            phi_u = {b: _rep_at(spqr, u, sid, b, cache) for b in branch_ids}
            phi_w = {b: _rep_at(spqr, w, sid, b, cache) for b in branch_ids}
            arcs.append(Arc.make(source_of[u], child, phi_u, False))
            arcs.append(Arc.make(source_of[w], child, phi_w, True))
        elif sk.kind == "R":
            child = f"R{sid}"
            trees[child] = fpq.qnode([fpq.leaf(0), fpq.leaf(1), fpq.leaf(2)])
            for v in sorted(sk.vertices):
                rot = refs[sid][v]
                phi = {j: _rep_at(spqr, v, sid, rot[j], cache) for j in range(3)}
                arcs.append(Arc.make(source_of[v], child, phi, False))

    return EmbeddingDag(g, spqr, SimFpqInstance(trees, arcs), source_of)


def solutions_to_rotation(g: Graph, dag: EmbeddingDag, sol: dict) -> RotationSystem:
    if not validate_solution(dag.instance, sol):
        raise InvalidSolution("not a solution of the embedding DAG")
    return {v: tuple(sol[dag.source_of[v]]) for v in g.vertices}
