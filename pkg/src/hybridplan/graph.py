"""Plain multigraphs, flat clustered graphs, planarity and rotation systems.

Vertices and edges are identified by integers.  Multi-edges are first class
(parallel edges get distinct edge ids); self-loops are rejected.  A rotation
system maps every vertex to a cyclic order (tuple) of its incident edge ids.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx

from .errors import MismatchedRotation

# ---------------------------------------------------------------------------
# Core types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Graph:
    """Undirected multigraph with stable integer vertex and edge ids."""

    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int, int], ...]  # (edge_id, u, v)

    def __post_init__(self):
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise ValueError("duplicate vertex ids")
        eids = [e for e, _, _ in self.edges]
        if len(set(eids)) != len(eids):
            raise ValueError("duplicate edge ids")
        for e, u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop on edge {e}")
            if u not in vs or v not in vs:
                raise ValueError(f"edge {e} has unknown endpoint")

    @staticmethod
    def build(vertices, edge_pairs) -> "Graph":
        """Graph from an iterable of (u, v) pairs; edge ids are positional."""
        edges = tuple((i, u, v) for i, (u, v) in enumerate(edge_pairs))
        return Graph(tuple(vertices), edges)

    def incident(self, v: int) -> list[int]:
        """Edge ids incident to v, in edge-id order."""
        return [e for e, a, b in self.edges if a == v or b == v]

    def endpoints(self, e: int) -> tuple[int, int]:
        for eid, u, v in self.edges:
            if eid == e:
                return u, v
        raise KeyError(e)

    def edge_map(self) -> dict[int, tuple[int, int]]:
        return {e: (u, v) for e, u, v in self.edges}

    def other_end(self, e: int, v: int) -> int:
        u, w = self.endpoints(e)
        return w if u == v else u

    def degree(self, v: int) -> int:
        return len(self.incident(v))

    def adjacency(self) -> dict[int, list[tuple[int, int]]]:
        """vertex -> list of (edge_id, neighbour)."""
        adj: dict[int, list[tuple[int, int]]] = {v: [] for v in self.vertices}
        for e, u, v in self.edges:
            adj[u].append((e, v))
            adj[v].append((e, u))
        return adj


#: vertex -> cyclic order of incident edge ids
RotationSystem = dict[int, tuple[int, ...]]


@dataclass(frozen=True)
class SideAnnotation:
    """Side label for one endpoint of an inter-cluster edge.

    ``side`` is one of "T", "R", "B", "L" for NodeTrix instances or an
    integer side index in 0..sigma-1 for PolyLink instances.
    """

    edge: int
    endpoint: int
    side: object


@dataclass(frozen=True)
class PolyLinkCluster:
    """PolyLink cluster: an even-sided polygon with antipodal side pairs.

    ``groups`` maps each disjoint vertex subset (a tuple of vertex ids) to the
    tuple of side pairs it owns.  A pair is (s, s + sigma/2 mod sigma) and is
    owned by at most one group.
    """

    cluster_id: int
    sigma: int
    groups: tuple[tuple[tuple[int, ...], tuple[tuple[int, int], ...]], ...]

    def __post_init__(self):
        if self.sigma < 2 or self.sigma % 2 != 0:
            raise ValueError("sigma must be even and >= 2")
        half = self.sigma // 2
        seen_pairs = set()
        seen_vertices = set()
        for vertices, pairs in self.groups:
            for v in vertices:
                if v in seen_vertices:
                    raise ValueError(f"vertex {v} in two groups")
                seen_vertices.add(v)
            for s1, s2 in pairs:
                if (s1 + half) % self.sigma != s2:
                    raise ValueError(f"sides {s1},{s2} are not antipodal")
                if (s1, s2) in seen_pairs:
                    raise ValueError(f"pair {s1},{s2} owned twice")
                seen_pairs.add((s1, s2))

    def pair_of_side(self, side: int) -> tuple[int, int]:
        half = self.sigma // 2
        return (side, side + half) if side < half else (side - half, side)

    def group_of_vertex(self, v: int):
        for vertices, pairs in self.groups:
            if v in vertices:
                return vertices, pairs
        return None


@dataclass(frozen=True)
class FlatClusteredGraph:
    """Graph plus vertex-disjoint clusters and per-endpoint side annotations."""

    graph: Graph
    clusters: tuple[tuple[int, tuple[int, ...]], ...]  # (cluster_id, vertices)
    sides: tuple[SideAnnotation, ...] = ()
    polylink: tuple[PolyLinkCluster, ...] = ()

    def __post_init__(self):
        seen = set()
        for cid, vs in self.clusters:
            for v in vs:
                if v in seen:
                    raise ValueError(f"vertex {v} in two clusters")
                seen.add(v)

    def cluster_of(self) -> dict[int, int]:
        """vertex -> cluster id; vertices outside any cluster are singletons
        with cluster id equal to ``-1 - vertex``."""
        out = {}
        for cid, vs in self.clusters:
            for v in vs:
                out[v] = cid
        for v in self.graph.vertices:
            out.setdefault(v, -1 - v)
        return out

    def cluster_vertices(self) -> dict[int, tuple[int, ...]]:
        out = {cid: tuple(vs) for cid, vs in self.clusters}
        mapping = self.cluster_of()
        for v in self.graph.vertices:
            cid = mapping[v]
            if cid not in out:
                out[cid] = (v,)
        return out

    def is_inter_cluster(self, e: int) -> bool:
        u, v = self.graph.endpoints(e)
        m = self.cluster_of()
        return m[u] != m[v]

    def side_of(self, e: int, endpoint: int):
        for ann in self.sides:
            if ann.edge == e and ann.endpoint == endpoint:
                return ann.side
        return None

    def polylink_cluster(self, cid: int) -> PolyLinkCluster | None:
        for pc in self.polylink:
            if pc.cluster_id == cid:
                return pc
        return None


# ---------------------------------------------------------------------------
# Connectivity and planarity
# ---------------------------------------------------------------------------


def _components(g: Graph, removed: frozenset[int] = frozenset()) -> list[set[int]]:
    adj = g.adjacency()
    seen: set[int] = set(removed)
    comps = []
    for start in g.vertices:
        if start in seen:
            continue
        comp = {start}
        stack = [start]
        seen.add(start)
        while stack:
            v = stack.pop()
            for _, w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    comp.add(w)
                    stack.append(w)
        comps.append(comp)
    return comps


def is_connected(g: Graph) -> bool:
    if not g.vertices:
        return False
    return len(_components(g)) == 1


def articulation_points(g: Graph) -> set[int]:
    """Cutvertices of a multigraph (parallel edges never create one)."""
    adj = g.adjacency()
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    result: set[int] = set()
    counter = 0
    for root in g.vertices:
        if root in index:
            continue
        # iterative DFS with per-vertex child bookkeeping
        stack = [(root, None, iter(adj[root]))]
        index[root] = low[root] = counter
        counter += 1
        root_children = 0
        while stack:
            v, in_edge, it = stack[-1]
            advanced = False
            for e, w in it:
                if e == in_edge:
                    # skip only the tree edge we entered through; a parallel
                    # edge has a different id and counts as a back edge
                    continue
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    if v == root:
                        root_children += 1
                    stack.append((w, e, iter(adj[w])))
                    advanced = True
                    break
                low[v] = min(low[v], index[w])
            if not advanced:
                stack.pop()
                if stack:
                    parent = stack[-1][0]
                    low[parent] = min(low[parent], low[v])
                    if parent != root and low[v] >= index[parent]:
                        result.add(parent)
        if root_children >= 2:
            result.add(root)
    return result


def is_biconnected(g: Graph) -> bool:
    """Connected, no cutvertex, and either >= 3 vertices or a multi-edge pair."""
    if not is_connected(g):
        return False
    n = len(g.vertices)
    if n < 2:
        return False
    if n == 2:
        return len(g.edges) >= 2
    return not articulation_points(g)


def is_planar(g: Graph) -> bool:
    """Planarity of a multigraph; parallel edges never affect the verdict."""
    if len(g.vertices) < 3:
        return True
    nxg = nx.Graph()
    nxg.add_nodes_from(g.vertices)
    nxg.add_edges_from((u, v) for _, u, v in g.edges)
    ok, _ = nx.check_planarity(nxg)
    return ok


def planar_embedding(g: Graph) -> RotationSystem | None:
    """Some planar rotation system of g, or None if g is not planar.

    Parallel edges are inserted next to their siblings in the simple-graph
    embedding, which keeps the result planar.
    """
    if not is_planar(g):
        return None
    nxg = nx.Graph()
    nxg.add_nodes_from(g.vertices)
    pair_edges: dict[tuple[int, int], list[int]] = {}
    for e, u, v in g.edges:
        key = (u, v) if u < v else (v, u)
        pair_edges.setdefault(key, []).append(e)
        nxg.add_edge(*key)
    _, emb = nx.check_planarity(nxg)
    data = emb.get_data()
    rotation: RotationSystem = {}
    for v in g.vertices:
        order: list[int] = []
        for w in data.get(v, []):
            key = (v, w) if v < w else (w, v)
            bundle = pair_edges[key]
            # nested parallel edges: reversed on one endpoint side
            order.extend(bundle if v < w else reversed(bundle))
        rotation[v] = tuple(order)
    return rotation


def check_rotation_planarity(g: Graph, rs: RotationSystem) -> bool:
    """Face-trace ``rs`` and test Euler's formula per connected component.

    This is the oracle-grade planarity check: it is independent of the
    planarity algorithm used by :func:`is_planar`.
    """
    incident = {v: g.incident(v) for v in g.vertices}
    if set(rs) != set(g.vertices):
        raise MismatchedRotation("rotation does not cover the vertex set")
    for v in g.vertices:
        if sorted(rs[v]) != sorted(incident[v]):
            raise MismatchedRotation(f"rotation at {v} does not list E({v})")

    edge_ends = g.edge_map()
    # dart = (edge, vertex the dart points to); after arriving at v through e
    # the walk leaves along the successor of e in the rotation at v
    succ: dict[tuple[int, int], int] = {}
    for v in g.vertices:
        order = rs[v]
        for i, e in enumerate(order):
            succ[(e, v)] = order[(i + 1) % len(order)]

    comp_of: dict[int, int] = {}
    for i, comp in enumerate(_components(g)):
        for v in comp:
            comp_of[v] = i
    n_comp = len(set(comp_of.values()))
    nv = [0] * n_comp
    ne = [0] * n_comp
    nf = [0] * n_comp
    for v in g.vertices:
        nv[comp_of[v]] += 1
    for _, u, _ in g.edges:
        ne[comp_of[u]] += 1

    visited: set[tuple[int, int]] = set()
    for e0, u0, v0 in g.edges:
        for dart in ((e0, v0), (e0, u0)):
            if dart in visited:
                continue
            nf[comp_of[u0]] += 1
            cur = dart
            while cur not in visited:
                visited.add(cur)
                e, v = cur
                nxt_e = succ[(e, v)]
                a, b = edge_ends[nxt_e]
                cur = (nxt_e, b if a == v else a)

    # Euler's formula at genus 0, per component with at least one edge
    return all(
        nv[i] - ne[i] + nf[i] == 2 for i in range(n_comp) if ne[i] > 0
    )


def reflect_rotation(rs: RotationSystem) -> RotationSystem:
    return {v: tuple(reversed(order)) for v, order in rs.items()}


def canonical_rotation(rs: RotationSystem) -> tuple:
    """Hashable canonical form: min rotation of each vertex order."""
    out = []
    for v in sorted(rs):
        order = rs[v]
        if not order:
            out.append((v, ()))
            continue
        rots = [order[i:] + order[:i] for i in range(len(order))]
        out.append((v, min(rots)))
    return tuple(out)


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------


def graph_from_json(data: dict) -> Graph:
    vertices = tuple(int(v) for v in data["vertices"])
    edges = tuple((int(e["id"]), int(e["u"]), int(e["v"])) for e in data["edges"])
    return Graph(vertices, edges)


def graph_to_json(g: Graph) -> dict:
    return {
        "vertices": list(g.vertices),
        "edges": [{"id": e, "u": u, "v": v} for e, u, v in g.edges],
    }


def clustered_from_json(data: dict) -> FlatClusteredGraph:
    g = graph_from_json(data)
    clusters = tuple(
        (int(c["id"]), tuple(int(v) for v in c["vertices"]))
        for c in data.get("clusters", ())
    )
    sides = tuple(
        SideAnnotation(
            int(s["edge"]),
            int(s["endpoint"]),
            s["side"] if isinstance(s["side"], str) else int(s["side"]),
        )
        for s in data.get("sides", ())
    )
    polylink = tuple(
        PolyLinkCluster(
            int(p["cluster"]),
            int(p["sigma"]),
            tuple(
                (
                    tuple(int(v) for v in grp["vertices"]),
                    tuple((int(a), int(b)) for a, b in grp["pairs"]),
                )
                for grp in p["groups"]
            ),
        )
        for p in data.get("polylink", ())
    )
    return FlatClusteredGraph(g, clusters, sides, polylink)


def clustered_to_json(fcg: FlatClusteredGraph) -> dict:
    data = graph_to_json(fcg.graph)
    data["clusters"] = [
        {"id": cid, "vertices": list(vs)} for cid, vs in fcg.clusters
    ]
    data["sides"] = [
        {"edge": s.edge, "endpoint": s.endpoint, "side": s.side} for s in fcg.sides
    ]
    if fcg.polylink:
        data["polylink"] = [
            {
                "cluster": p.cluster_id,
                "sigma": p.sigma,
                "groups": [
                    {"vertices": list(vs), "pairs": [list(pr) for pr in pairs]}
                    for vs, pairs in p.groups
                ],
            }
            for p in fcg.polylink
        ]
    return data
