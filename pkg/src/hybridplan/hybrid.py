"""Hybrid planarity tests: row-column-independent NodeTrix, PolyLink, and
clique planarity with fixed sides.

Clusters collapse to single vertices of the equipped frame graph; each
cluster contributes a constraint DAG whose source is an F-node over its
polygon sides (side blocks in fixed cyclic order), with per-vertex P-groups
under each side and one coherence child per antipodal side pair tying the
two sides' vertex orders mirror-wise.

Coherence trees carry one extra anchor leaf mapped into the opposite side
block.  Without it the extends-relation only ties the two sides' orders up
to rotation (cyclic suborders cannot express linear mirroring), which lets
rotation-slack solutions through that no matrix drawing realizes; the
anchor pins the reading frame and the instances stay 1-fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    INFEASIBLE,
    FrameNotBiconnected,
    InternalError,
    InvalidSideStructure,
    MissingSideAnnotation,
    NotAClique,
)
from . import fpqtree as fpq
from .graph import (
    FlatClusteredGraph,
    Graph,
    PolyLinkCluster,
    RotationSystem,
    SideAnnotation,
    check_rotation_planarity,
    is_biconnected,
    is_planar,
)
from .onefixed import OneFixedConstraint, test_one_fixed_planarity
from .simfpq import Arc, SimFpqInstance

NODETRIX_SIDES = {"T": 0, "R": 1, "B": 2, "L": 3}

# ---------------------------------------------------------------------------
# Frame graph and endpoint bookkeeping
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Endpoint:
    edge: int
    cluster: int
    vertex: int
    side: object  # int side index once resolved


def equipped_frame_graph(fcg: FlatClusteredGraph):
    """Collapse clusters to vertices; keeps one frame edge per inter-cluster
    edge (original ids, parallel edges preserved).  Returns the frame and a
    map edge -> (endpoint at tail cluster, endpoint at head cluster)."""
    cluster_of = fcg.cluster_of()
    frame_vertices = sorted(set(cluster_of.values()))
    edges = []
    provenance = {}
    for e, u, v in fcg.graph.edges:
        cu, cv = cluster_of[u], cluster_of[v]
        if cu == cv:
            continue
        edges.append((e, cu, cv))
        provenance[e] = (
            Endpoint(e, cu, u, fcg.side_of(e, u)),
            Endpoint(e, cv, v, fcg.side_of(e, v)),
        )
    return Graph(tuple(frame_vertices), tuple(edges)), provenance


def _cluster_endpoints(provenance, cid) -> list[Endpoint]:
    out = []
    for pair in provenance.values():
        for ep in pair:
            if ep.cluster == cid:
                out.append(ep)
    return sorted(out, key=lambda ep: ep.edge)


# ---------------------------------------------------------------------------
# Constraint DAGs
# ---------------------------------------------------------------------------


@dataclass
class ConstraintDag:
    cluster: int
    sigma: int
    constraint: OneFixedConstraint
    side_of_edge: dict[int, int]
    vertex_of_edge: dict[int, int]
    groups: tuple  # ((vertices, pairs), ...)
    side_vertex_edges: dict[tuple[int, int], tuple[int, ...]]


def _build_cluster_constraint(cid: int, pc: PolyLinkCluster,
                              endpoints: list[Endpoint],
                              rigid_coherence: bool = False) -> ConstraintDag:
    """Source F-node over the polygon sides with per-vertex P-groups, plus
    one anchored coherence child per side pair with >= 2 common vertices."""
    side_of_edge: dict[int, int] = {}
    vertex_of_edge: dict[int, int] = {}
    by_side_vertex: dict[tuple[int, int], list[int]] = {}
    for ep in endpoints:
        if ep.side is None:
            raise MissingSideAnnotation(f"edge {ep.edge} at cluster {cid}")
        side = int(ep.side)
        if not 0 <= side < pc.sigma:
            raise InvalidSideStructure(f"side {side} out of range at {cid}")
        grp = pc.group_of_vertex(ep.vertex)
        if grp is None:
            raise InvalidSideStructure(
                f"vertex {ep.vertex} of cluster {cid} is in no side group")
        pair = pc.pair_of_side(side)
        if pair not in grp[1]:
            raise InvalidSideStructure(
                f"edge {ep.edge}: side {side} not in the pairs of vertex "
                f"{ep.vertex}")
        side_of_edge[ep.edge] = side
        vertex_of_edge[ep.edge] = ep.vertex
        by_side_vertex.setdefault((side, ep.vertex), []).append(ep.edge)

    for key in by_side_vertex:
        by_side_vertex[key] = sorted(by_side_vertex[key])

    side_nodes = []
    for s in range(pc.sigma):
        groups = [
            (v, edges) for (side, v), edges in sorted(by_side_vertex.items())
            if side == s
        ]
        if not groups:
            continue
        kids = []
        for _, edges in groups:
            kids.append(fpq.leaf(edges[0]) if len(edges) == 1
                        else fpq.pnode([fpq.leaf(e) for e in edges]))
        side_nodes.append(kids[0] if len(kids) == 1 else fpq.pnode(kids))
    if not side_nodes:
        raise InvalidSideStructure(f"cluster {cid} has no inter-cluster edges")
    source_tree = fpq.simplify(
        fpq.fnode(side_nodes) if len(side_nodes) > 1 else side_nodes[0]
    )

    src = f"M{cid}"
    trees = {src: source_tree}
    arcs: list[Arc] = []
    for vertices, pairs in pc.groups:
        for s1, s2 in pairs:
            active1 = {v for v in vertices if (s1, v) in by_side_vertex}
            active2 = {v for v in vertices if (s2, v) in by_side_vertex}
            common = sorted(active1 & active2)
            if len(common) < 2:
                continue
            name = f"coh{cid}_{s1}_{s2}"
            slot_leaves = [f"s{v}" for v in common]
            kids = [fpq.leaf(x) for x in slot_leaves + ["o"]]
            trees[name] = fpq.fnode(kids) if rigid_coherence else fpq.pnode(kids)
            side1_edges = sorted(
                e for (s, _), es in by_side_vertex.items() if s == s1 for e in es
            )
            side2_edges = sorted(
                e for (s, _), es in by_side_vertex.items() if s == s2 for e in es
            )
            phi1 = {f"s{v}": by_side_vertex[(s1, v)][0] for v in common}
            phi1["o"] = side2_edges[0]
            phi2 = {f"s{v}": by_side_vertex[(s2, v)][0] for v in common}
            phi2["o"] = side1_edges[0]
            arcs.append(Arc.make(src, name, phi1, False))
            arcs.append(Arc.make(src, name, phi2, True))

    inst = SimFpqInstance(trees, arcs)
    constraint = OneFixedConstraint(inst, src)
    return ConstraintDag(
        cid, pc.sigma, constraint, side_of_edge, vertex_of_edge, pc.groups,
        {k: tuple(v) for k, v in by_side_vertex.items()},
    )


def _nodetrix_polylink_cluster(cid: int, vertices) -> PolyLinkCluster:
    """A matrix is a 4-gon whose single vertex group owns both side pairs
    (rows on R/L, columns on T/B)."""
    return PolyLinkCluster(cid, 4, ((tuple(sorted(vertices)), ((0, 2), (1, 3))),))


def constraint_dag_nodetrix(cid: int, vertices, endpoints: list[Endpoint],
                            rigid_coherence: bool = False) -> ConstraintDag:
    resolved = []
    for ep in endpoints:
        if ep.side is None:
            raise MissingSideAnnotation(f"edge {ep.edge} at cluster {cid}")
        side = NODETRIX_SIDES.get(ep.side, ep.side)
        resolved.append(Endpoint(ep.edge, ep.cluster, ep.vertex, side))
    pc = _nodetrix_polylink_cluster(cid, vertices)
    return _build_cluster_constraint(cid, pc, resolved, rigid_coherence)


def constraint_dag_polylink(pc: PolyLinkCluster, endpoints: list[Endpoint],
                            rigid_coherence: bool = False) -> ConstraintDag:
    return _build_cluster_constraint(pc.cluster_id, pc, endpoints,
                                     rigid_coherence)


# ---------------------------------------------------------------------------
# Witnesses
# ---------------------------------------------------------------------------


@dataclass
class ClusterLayout:
    cluster: int
    sigma: int
    #: side -> ordered (vertex, ordered edge ids) along the boundary reading
    side_orders: dict[int, list[tuple[int, tuple[int, ...]]]]
    #: (s1, s2) -> vertex permutation shared by the pair
    pair_orders: dict[tuple[int, int], tuple[int, ...]]


@dataclass
class Witness:
    frame: Graph
    frame_rotation: RotationSystem
    clusters: list[ClusterLayout]
    expanded: Graph
    expanded_rotation: RotationSystem


def _split_sides(order: tuple, cdag: ConstraintDag) -> dict[int, list[int]]:
    """Cut a solved rotation into its per-side segments (the F-node made the
    side blocks contiguous)."""
    n = len(order)
    if n == 0:
        return {}
    sides = [cdag.side_of_edge[e] for e in order]
    start = 0
    if len(set(sides)) > 1:
        while sides[start] == sides[start - 1]:
            start -= 1  # walk back to a block boundary (negative indexing)
        start %= n
    else:
        # the whole boundary is one side: anchor the cut at a vertex-group
        # boundary instead (the cyclic cut point is otherwise arbitrary)
        owners = [cdag.vertex_of_edge[e] for e in order]
        if len(set(owners)) > 1:
            while owners[start] == owners[start - 1]:
                start -= 1
            start %= n
    segs: dict[int, list[int]] = {}
    i = start
    for _ in range(n):
        segs.setdefault(sides[i], []).append(order[i])
        i = (i + 1) % n
    counts: dict[int, int] = {}
    for s in sides:
        counts[s] = counts.get(s, 0) + 1
    if any(len(segs[s]) != counts[s] for s in segs):
        raise InternalError("side blocks are not contiguous in the solution")
    return segs


def _vertex_runs(segment: list[int], cdag: ConstraintDag):
    runs: list[tuple[int, list[int]]] = []
    for e in segment:
        v = cdag.vertex_of_edge[e]
        if runs and runs[-1][0] == v:
            runs[-1][1].append(e)
        else:
            runs.append((v, [e]))
    if len({v for v, _ in runs}) != len(runs):
        raise InternalError("vertex groups are not contiguous on a side")
    return [(v, tuple(es)) for v, es in runs]


def _merge_pair_order(seq1: list[int], seq2_reversed: list[int]) -> tuple[int, ...]:
    """Merge two vertex sequences that must agree on their common subsequence."""
    common = set(seq1) & set(seq2_reversed)
    a = [v for v in seq1 if v in common]
    b = [v for v in seq2_reversed if v in common]
    if a != b:
        raise InternalError("coherence violated between antipodal sides")
    out: list[int] = []
    i = j = 0
    while i < len(seq1) or j < len(seq2_reversed):
        if i < len(seq1) and seq1[i] not in common:
            out.append(seq1[i])
            i += 1
        elif j < len(seq2_reversed) and seq2_reversed[j] not in common:
            out.append(seq2_reversed[j])
            j += 1
        else:
            out.append(seq1[i])
            i += 1
            j += 1
    return tuple(out)


def extract_layout(rot: RotationSystem, cdags: dict[int, ConstraintDag]):
    layouts = []
    for cid in sorted(cdags):
        cdag = cdags[cid]
        segs = _split_sides(tuple(rot[cid]), cdag)
        side_orders = {
            s: _vertex_runs(seg, cdag) for s, seg in sorted(segs.items())
        }
        pair_orders = {}
        for vertices, pairs in cdag.groups:
            for s1, s2 in pairs:
                seq1 = [v for v, _ in side_orders.get(s1, ())]
                seq2 = [v for v, _ in side_orders.get(s2, ())]
                seq2.reverse()
                if not seq1 and not seq2:
                    continue
                merged = _merge_pair_order(seq1, seq2)
                rest = tuple(v for v in sorted(vertices) if v not in merged)
                pair_orders[(s1, s2)] = merged + rest
        layouts.append(ClusterLayout(cid, cdag.sigma, side_orders, pair_orders))
    return layouts


def expand_witness(fcg: FlatClusteredGraph, frame: Graph,
                   rot: RotationSystem, cdags: dict[int, ConstraintDag]) -> Witness:
    """Wheel-gadget expansion: per cluster a hub, a rim vertex per side, a
    side attachment vertex per used side, slot vertices in the solved order,
    and one spoke edge per inter-cluster edge.  The expansion must be planar
    for the induced rotations; anything else is a solver bug and raises."""
    layouts = extract_layout(rot, cdags)
    vertices: list[int] = []
    rotation: dict[int, list] = {}
    coords: dict[int, tuple[float, float]] = {}
    next_vertex = [0]

    def new_vertex(x: float, y: float) -> int:
        vid = next_vertex[0]
        next_vertex[0] += 1
        vertices.append(vid)
        coords[vid] = (x, y)
        return vid

    edge_pairs: list[tuple[int, int]] = []

    def new_edge(a: int, b: int) -> int:
        edge_pairs.append((a, b))
        return len(edge_pairs) - 1

    # rotations come from the local geometry: stubs sorted by angle at the
    # vertex; spoke stubs get the slot's outward direction
    pending: dict[int, list[tuple[float, object]]] = {}

    def attach(vid: int, other: int, stub) -> None:
        ox, oy = coords[other]
        x, y = coords[vid]
        pending.setdefault(vid, []).append((math.atan2(oy - y, ox - x), stub))

    def attach_ray(vid: int, angle: float, stub) -> None:
        pending.setdefault(vid, []).append((angle % (2 * math.pi), stub))

    slot_of: dict[tuple[int, int, int], int] = {}  # (cluster, side, vertex)

    for layout in layouts:
        cid = layout.cluster
        sigma = max(layout.sigma, 3)
        theta = lambda s: 2 * math.pi * s / sigma
        hub = new_vertex(0.0, 0.0)
        rim = [
            new_vertex(math.cos(theta(s)), math.sin(theta(s)))
            for s in range(sigma)
        ]
        for s in range(sigma):
            a, b = rim[s], rim[(s + 1) % sigma]
            eid = new_edge(a, b)
            attach(a, b, eid)
            attach(b, a, eid)
        for s in range(sigma):
            eid = new_edge(hub, rim[s])
            attach(hub, rim[s], eid)
            attach(rim[s], hub, eid)
        for s, runs in sorted(layout.side_orders.items()):
            pi_v = new_vertex(1.7 * math.cos(theta(s)), 1.7 * math.sin(theta(s)))
            eid = new_edge(rim[s], pi_v)
            attach(rim[s], pi_v, eid)
            attach(pi_v, rim[s], eid)
            m = len(runs)
            width = math.pi / sigma
            for j, (v, es) in enumerate(runs):
                off = ((j + 0.5) / m - 0.5) * 2 * width * 0.8
                ang = theta(s) + off
                slot = new_vertex(2.4 * math.cos(ang), 2.4 * math.sin(ang))
                slot_of[(cid, s, v)] = slot
                eid = new_edge(pi_v, slot)
                attach(pi_v, slot, eid)
                attach(slot, pi_v, eid)
                for r, e in enumerate(es):
                    spread = ((r + 0.5) / len(es) - 0.5) * 0.4 * width
                    attach_ray(slot, ang + spread, ("spoke", e))

    # spokes: one edge per original inter-cluster frame edge
    spoke_edge_of: dict[int, int] = {}
    for e, u, v in frame.edges:
        cdag_u, cdag_v = cdags[u], cdags[v]
        slot_u = slot_of[(u, cdag_u.side_of_edge[e], cdag_u.vertex_of_edge[e])]
        slot_v = slot_of[(v, cdag_v.side_of_edge[e], cdag_v.vertex_of_edge[e])]
        spoke_edge_of[e] = new_edge(slot_u, slot_v)

    rotation = {}
    for vid in vertices:
        stubs = sorted(pending.get(vid, ()), key=lambda t: t[0])
        rotation[vid] = tuple(
            spoke_edge_of[stub[1]] if isinstance(stub, tuple) else stub
            for _, stub in stubs
        )

    expanded = Graph.build(vertices, edge_pairs)
    if not is_planar(expanded) or not check_rotation_planarity(expanded, rotation):
        raise InternalError("witness expansion is not planar; solver bug")
    return Witness(frame, {v: tuple(rot[v]) for v in rot}, layouts, expanded,
                   rotation)


# ---------------------------------------------------------------------------
# The three tests
# ---------------------------------------------------------------------------


def _frame_or_fail(fcg: FlatClusteredGraph):
    frame, provenance = equipped_frame_graph(fcg)
    if not is_biconnected(frame):
        raise FrameNotBiconnected(
            f"frame graph on {len(frame.vertices)} vertices is not biconnected")
    return frame, provenance


def _run_hybrid_test(fcg: FlatClusteredGraph, cdags, frame):
    if not is_planar(frame):
        return INFEASIBLE
    constraints = {cid: cdag.constraint for cid, cdag in cdags.items()}
    rot = test_one_fixed_planarity(frame, constraints)
    if rot is INFEASIBLE:
        return INFEASIBLE
    return expand_witness(fcg, frame, rot, cdags)


def nodetrix_constraints(fcg: FlatClusteredGraph, frame, provenance,
                         rigid_coherence=False) -> dict[int, ConstraintDag]:
    clusters = fcg.cluster_vertices()
    return {
        cid: constraint_dag_nodetrix(
            cid, clusters[cid], _cluster_endpoints(provenance, cid),
            rigid_coherence)
        for cid in frame.vertices
    }


def test_rci_nt(fcg: FlatClusteredGraph, rigid_coherence: bool = False):
    """Row-column independent NodeTrix planarity with fixed sides."""
    frame, provenance = _frame_or_fail(fcg)
    cdags = nodetrix_constraints(fcg, frame, provenance, rigid_coherence)
    return _run_hybrid_test(fcg, cdags, frame)


def _polylink_of(fcg: FlatClusteredGraph, cid: int, vertices) -> PolyLinkCluster:
    pc = fcg.polylink_cluster(cid)
    if pc is not None:
        return pc
    return PolyLinkCluster(cid, 2, ((tuple(sorted(vertices)), ((0, 1),)),))


def test_polylink(fcg: FlatClusteredGraph):
    """PolyLink planarity with fixed sides; clusters without an explicit
    polygon get a 2-sided one."""
    frame, provenance = _frame_or_fail(fcg)
    clusters = fcg.cluster_vertices()
    cdags = {}
    for cid in frame.vertices:
        pc = _polylink_of(fcg, cid, clusters[cid])
        cdags[cid] = constraint_dag_polylink(
            pc, _cluster_endpoints(provenance, cid))
    return _run_hybrid_test(fcg, cdags, frame)


# ---------------------------------------------------------------------------
# Clique planarity with fixed sides
# ---------------------------------------------------------------------------

_EXTREME_LOW = {"B", "L", "T"}   # exposure of the first square on the diagonal
_EXTREME_HIGH = {"T", "R", "B"}  # exposure of the last square


class NoCanonicalPlacement(InvalidSideStructure):
    """No clique vertex pair can take the two single-appearance roles of the
    canonical diagonal; the instance has no canonical representation."""


def clique_to_polylink(fcg: FlatClusteredGraph) -> FlatClusteredGraph:
    """Model clique clusters as 4-gons: one antipodal pair carries the k-2
    middle vertices (upper-left staircase vs lower-right, mirrored), the
    other pair the two extreme squares of the canonical diagonal, each using
    a single side."""
    cluster_of = fcg.cluster_of()
    clusters = fcg.cluster_vertices()
    edge_map = fcg.graph.edge_map()

    # validate cliques
    for cid, vs in clusters.items():
        need = {frozenset(p) for p in _pairs(vs)}
        have = {
            frozenset(edge_map[e])
            for e, (u, v) in edge_map.items()
            if cluster_of[u] == cid and cluster_of[v] == cid
        }
        if need - have:
            raise NotAClique(f"cluster {cid} misses intra-cluster edges")

    annotations: dict[tuple[int, int], str] = {}
    for s in fcg.sides:
        annotations[(s.edge, s.endpoint)] = s.side

    new_sides: list[SideAnnotation] = []
    polylink: list[PolyLinkCluster] = []
    for cid, vs in sorted(clusters.items()):
        vs = tuple(sorted(vs))
        sides_of_vertex: dict[int, set] = {v: set() for v in vs}
        eps: list[tuple[int, int, str]] = []
        for e, (u, w) in edge_map.items():
            for x in (u, w):
                if cluster_of[x] != cid or cluster_of[u] == cluster_of[w]:
                    continue
                side = annotations.get((e, x))
                if side is None:
                    raise MissingSideAnnotation(f"edge {e} endpoint {x}")
                sides_of_vertex[x].add(side)
                eps.append((e, x, side))
        if len(vs) == 1:
            polylink.append(PolyLinkCluster(cid, 2, ((vs, ((0, 1),)),)))
            for e, x, side in eps:
                new_sides.append(SideAnnotation(e, x, 0))
            continue
        lows = [v for v in vs if sides_of_vertex[v] <= _EXTREME_LOW]
        highs = [v for v in vs if sides_of_vertex[v] <= _EXTREME_HIGH]
        lo = hi = None
        for a in lows:
            for b in highs:
                if a != b:
                    lo, hi = a, b
                    break
            if lo is not None:
                break
        if lo is None:
            raise NoCanonicalPlacement(f"cluster {cid}")
        middles = tuple(v for v in vs if v not in (lo, hi))
        if len(vs) == 2:
            polylink.append(PolyLinkCluster(cid, 2, (((lo, hi), ((0, 1),)),)))
            side_of = lambda v, s: 0 if v == lo else 1
        else:
            polylink.append(PolyLinkCluster(
                cid, 4, (((lo, hi), ((0, 2),)), (middles, ((1, 3),)))))

            def side_of(v, s, lo=lo, hi=hi):
                if v == lo:
                    return 0
                if v == hi:
                    return 2
                return 1 if s in ("L", "T") else 3

        for e, x, side in eps:
            new_sides.append(SideAnnotation(e, x, side_of(x, side)))

    return FlatClusteredGraph(fcg.graph, fcg.clusters, tuple(new_sides),
                              tuple(polylink))


def _pairs(vs):
    vs = list(vs)
    for i in range(len(vs)):
        for j in range(i + 1, len(vs)):
            yield (vs[i], vs[j])


def test_clique_planarity_fixed_sides(fcg: FlatClusteredGraph):
    """Clique planarity with fixed sides = clique_to_polylink + PolyLink."""
    try:
        modeled = clique_to_polylink(fcg)
    except NoCanonicalPlacement:
        return INFEASIBLE
    return test_polylink(modeled)


test_rci_nt.__test__ = False
test_polylink.__test__ = False
test_clique_planarity_fixed_sides.__test__ = False
