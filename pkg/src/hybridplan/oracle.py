"""Brute-force ground truth for the planarity tests.

These oracles never touch the FPQ-tree machinery: they enumerate rotation
systems (or per-cluster permutation tuples inducing them) and decide
planarity by face tracing alone.  A realizable matrix/polygon boundary is
(side 0 content, side 1 content, ...) with each antipodal pair's second
side reversed, which is exactly what the enumeration builds.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import permutations, product

from .errors import BudgetExceeded, InvalidSideStructure, MissingSideAnnotation
from .graph import (
    FlatClusteredGraph,
    Graph,
    PolyLinkCluster,
    RotationSystem,
    canonical_rotation,
    check_rotation_planarity,
)

_NODETRIX_SIDES = {"T": 0, "R": 1, "B": 2, "L": 3}


@dataclass
class OracleBudget:
    max_clusters: int = 4
    max_cluster_size: int = 3
    max_edges: int = 8
    max_states: int = 10_000_000
    wall_clock_s: float | None = None

    def __post_init__(self):
        if min(self.max_clusters, self.max_cluster_size, self.max_edges,
               self.max_states) <= 0:
            raise ValueError("budget fields must be positive")

    def start(self):
        self._t0 = time.monotonic()

    def tick(self):
        if self.wall_clock_s is not None:
            if time.monotonic() - self._t0 > self.wall_clock_s:
                raise BudgetExceeded("oracle wall clock")


# ---------------------------------------------------------------------------
# Rotation systems of a plain graph
# ---------------------------------------------------------------------------


def oracle_planar_rotations(g: Graph, budget: OracleBudget | None = None) -> set:
    """All planar rotation systems, canonicalized; exact within budget."""
    budget = budget or OracleBudget()
    budget.start()
    per_vertex = []
    count = 1
    for v in g.vertices:
        inc = g.incident(v)
        if len(inc) <= 2:
            per_vertex.append([tuple(inc)])
        else:
            first, rest = inc[0], inc[1:]
            opts = [(first,) + p for p in permutations(rest)]
            per_vertex.append(opts)
            count *= len(opts)
        if count > budget.max_states:
            raise BudgetExceeded(f"{count} rotation systems")
    out = set()
    for combo in product(*per_vertex):
        budget.tick()
        rs = dict(zip(g.vertices, combo))
        if check_rotation_planarity(g, rs):
            out.add(canonical_rotation(rs))
    return out


# ---------------------------------------------------------------------------
# Hybrid oracles
# ---------------------------------------------------------------------------


def _gather(fcg: FlatClusteredGraph, nodetrix: bool):
    """Frame edges and per-cluster (side, vertex) -> edge list tables."""
    cluster_of = fcg.cluster_of()
    frame_vertices = sorted(set(cluster_of.values()))
    frame_edges = []
    tables: dict[int, dict] = {cid: {} for cid in frame_vertices}
    for e, u, v in fcg.graph.edges:
        cu, cv = cluster_of[u], cluster_of[v]
        if cu == cv:
            continue
        frame_edges.append((e, cu, cv))
        for cid, x in ((cu, u), (cv, v)):
            side = fcg.side_of(e, x)
            if side is None:
                raise MissingSideAnnotation(f"edge {e} endpoint {x}")
            if nodetrix:
                side = _NODETRIX_SIDES.get(side, side)
            tables[cid].setdefault((int(side), x), []).append(e)
    for t in tables.values():
        for k in t:
            t[k] = sorted(t[k])
    frame = Graph(tuple(frame_vertices), tuple(frame_edges))
    return frame, tables


def _polylink_data(fcg: FlatClusteredGraph, nodetrix: bool):
    clusters = fcg.cluster_vertices()
    out = {}
    for cid, vs in clusters.items():
        if nodetrix:
            out[cid] = PolyLinkCluster(
                cid, 4, ((tuple(sorted(vs)), ((0, 2), (1, 3))),))
        else:
            pc = fcg.polylink_cluster(cid)
            out[cid] = pc if pc is not None else PolyLinkCluster(
                cid, 2, ((tuple(sorted(vs)), ((0, 1),)),))
    return out


def _cluster_axes(pc: PolyLinkCluster, table: dict, tie_pairs: bool):
    """Independent choice axes: one vertex permutation per (group, pair)
    (or per group when pairs are tied) and one order per multi-edge slot."""
    axes = []
    sides_seen = {s for (s, _) in table}
    owned = {pair for _, pairs in pc.groups for pair in pairs}
    for s in sides_seen:
        if pc.pair_of_side(s) not in owned:
            raise InvalidSideStructure(f"side {s} belongs to no group")
    for vertices, pairs in pc.groups:
        if tie_pairs and len(pairs) > 1:
            active = sorted(
                v for v in vertices
                if any((s, v) in table for pair in pairs for s in pair)
            )
            if len(active) > 1:
                axes.append((("tied", vertices), list(permutations(active))))
        else:
            for pair in pairs:
                s1, s2 = pair
                active = sorted(
                    v for v in vertices if (s1, v) in table or (s2, v) in table
                )
                if len(active) > 1:
                    axes.append((("pair", pair), list(permutations(active))))
    for key, es in sorted(table.items()):
        if len(es) > 1:
            axes.append((("edges", key), list(permutations(es))))
    return axes


def _cluster_rotation(pc: PolyLinkCluster, table: dict, choice: dict) -> tuple:
    rotation = []
    for s in range(pc.sigma):
        pair = pc.pair_of_side(s)
        owner = None
        for vertices, pairs in pc.groups:
            if pair in pairs:
                owner = (vertices, pairs)
                break
        if owner is None:
            continue
        vertices, pairs = owner
        perm = choice.get(("pair", pair)) or choice.get(("tied", vertices))
        if perm is None:
            perm = tuple(sorted(vertices))
        seq = [v for v in perm if (s, v) in table]
        if s == pair[1]:
            seq.reverse()
        for v in seq:
            es = table[(s, v)]
            rotation.extend(choice.get(("edges", (s, v)), tuple(es)))
    return tuple(rotation)


def _oracle_hybrid(fcg: FlatClusteredGraph, nodetrix: bool, tie_pairs: bool,
                   budget: OracleBudget | None) -> bool:
    budget = budget or OracleBudget()
    budget.start()
    clusters = fcg.cluster_vertices()
    if len(clusters) > budget.max_clusters:
        raise BudgetExceeded("too many clusters")
    if any(len(vs) > budget.max_cluster_size for vs in clusters.values()):
        raise BudgetExceeded("cluster too large")
    frame, tables = _gather(fcg, nodetrix)
    if len(frame.edges) > budget.max_edges:
        raise BudgetExceeded("too many inter-cluster edges")
    polys = _polylink_data(fcg, nodetrix)

    axes_per_cluster = []
    states = 1
    for cid in frame.vertices:
        axes = _cluster_axes(polys[cid], tables[cid], tie_pairs)
        axes_per_cluster.append((cid, axes))
        for _, options in axes:
            states *= len(options)
        if states > budget.max_states:
            raise BudgetExceeded(f"{states} permutation tuples")

    def rec(i: int, rotations: dict) -> bool:
        if i == len(axes_per_cluster):
            return check_rotation_planarity(frame, rotations)
        cid, axes = axes_per_cluster[i]
        keys = [k for k, _ in axes]
        for combo in product(*(opts for _, opts in axes)):
            budget.tick()
            choice = dict(zip(keys, combo))
            rotations[cid] = _cluster_rotation(polys[cid], tables[cid], choice)
            if rec(i + 1, rotations):
                return True
        rotations.pop(cid, None)
        return False

    return rec(0, {})


def oracle_rci(fcg: FlatClusteredGraph, budget: OracleBudget | None = None,
               rows_equal_cols: bool = False) -> bool:
    """Exact RCI-NodeTrix planarity by enumerating row/column permutations
    per cluster plus slot braidings, checking frame realizability by face
    tracing.  ``rows_equal_cols`` forces one permutation per cluster (the
    classic fixed-sides NodeTrix restriction)."""
    return _oracle_hybrid(fcg, nodetrix=True, tie_pairs=rows_equal_cols,
                          budget=budget)


def oracle_polylink(fcg: FlatClusteredGraph,
                    budget: OracleBudget | None = None) -> bool:
    """Exact PolyLink planarity with fixed sides, same scheme."""
    return _oracle_hybrid(fcg, nodetrix=False, tie_pairs=False, budget=budget)
