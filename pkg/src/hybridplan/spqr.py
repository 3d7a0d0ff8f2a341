"""SPQR decomposition of biconnected planar multigraphs.

The decomposition is computed by recursive splitting at separation pairs
followed by merging of adjacent same-type skeletons, which yields the unique
Tutte tree of triconnected components.  Speed is quadratic-ish; correctness
is what matters here and is enforced by the re-glue test and ultimately by
the embedding-DAG bijection checks.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import NotBiconnected, NotPlanar
from .graph import Graph, is_biconnected, is_planar

# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SkelEdge:
    eid: int
    u: int
    v: int
    virtual: bool


@dataclass
class Skeleton:
    sid: int
    kind: str  # "S" | "P" | "R"
    edges: list[SkelEdge]

    @property
    def vertices(self) -> set[int]:
        out = set()
        for e in self.edges:
            out.add(e.u)
            out.add(e.v)
        return out

    def incident(self, v: int) -> list[SkelEdge]:
        return [e for e in self.edges if e.u == v or e.v == v]


@dataclass
class SpqrTree:
    skeletons: dict[int, Skeleton]
    twins: dict[int, tuple[int, int]]  # virtual eid -> (skeleton, skeleton)

    def neighbors(self, sid: int) -> list[tuple[int, int]]:
        """(virtual edge id, neighbouring skeleton id) pairs of a skeleton."""
        out = []
        for vid, (a, b) in self.twins.items():
            if a == sid:
                out.append((vid, b))
            elif b == sid:
                out.append((vid, a))
        return out

    def skeletons_with_vertex(self, v: int) -> list[int]:
        return [sid for sid, sk in self.skeletons.items() if v in sk.vertices]

    def poles(self, vid: int) -> tuple[int, int]:
        """Endpoints of a virtual edge (the separation pair it represents)."""
        a, _ = self.twins[vid]
        for e in self.skeletons[a].edges:
            if e.eid == vid:
                return e.u, e.v
        raise KeyError(vid)


# ---------------------------------------------------------------------------
# Decomposition
# ---------------------------------------------------------------------------


def _degrees(edges) -> dict[int, int]:
    deg: dict[int, int] = {}
    for _, u, v in edges:
        deg[u] = deg.get(u, 0) + 1
        deg[v] = deg.get(v, 0) + 1
    return deg


def _is_cycle(edges) -> bool:
    deg = _degrees(edges)
    if any(d != 2 for d in deg.values()):
        return False
    # connectivity over the edge set
    verts = list(deg)
    adj: dict[int, list[int]] = {v: [] for v in verts}
    for _, u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = {verts[0]}
    stack = [verts[0]]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == len(verts)


def _edge_classes(edges, u: int, v: int):
    """Separation classes at {u, v}: each direct u-v edge alone, and one
    class per connected component of the rest."""
    direct = [e for e in edges if {e[1], e[2]} == {u, v}]
    rest = [e for e in edges if {e[1], e[2]} != {u, v}]
    adj: dict[int, list[tuple[int, int]]] = {}
    for eid, a, b in rest:
        adj.setdefault(a, []).append((eid, b))
        adj.setdefault(b, []).append((eid, a))
    comp_classes = []
    seen: set[int] = set()
    for start in adj:
        if start in seen or start in (u, v):
            continue
        comp = {start}
        stack = [start]
        seen.add(start)
        while stack:
            x = stack.pop()
            for _, y in adj[x]:
                if y in (u, v) or y in seen:
                    continue
                seen.add(y)
                comp.add(y)
                stack.append(y)
        cls = [e for e in rest if e[1] in comp or e[2] in comp]
        comp_classes.append(cls)
    return direct, comp_classes


def _find_split(edges):
    """A separation pair plus an edge bipartition (A, B), both sides >= 2
    edges, or None if the component is cycle/bond/triconnected."""
    verts = sorted(_degrees(edges))
    n = len(edges)
    for i, u in enumerate(verts):
        for v in verts[i + 1 :]:
            direct, comps = _edge_classes(edges, u, v)
            n_classes = len(direct) + len(comps)
            if n_classes < 2:
                continue
            if len(direct) >= 2 and n - len(direct) >= 2:
                return u, v, direct
            for cls in comps:
                if len(cls) >= 2 and n - len(cls) >= 2 and n_classes >= 2:
                    # peeling requires the complement to be a genuine side
                    if len(cls) < n:
                        return u, v, cls
    return None


def spqr_decompose(g: Graph) -> SpqrTree:
    if not is_biconnected(g):
        raise NotBiconnected("SPQR decomposition needs a biconnected graph")
    if not is_planar(g):
        raise NotPlanar("SPQR decomposition restricted to planar graphs here")

    next_virtual = max((e for e, _, _ in g.edges), default=0) + 1
    virtual_ids: set[int] = set()
    skeletons: dict[int, Skeleton] = {}
    twins_half: dict[int, list[int]] = {}
    next_sid = 0

    work = [[(e, u, v) for e, u, v in g.edges]]
    while work:
        edges = work.pop()
        deg = _degrees(edges)
        if len(deg) == 2 and len(edges) >= 3:
            kind = "P"
        elif _is_cycle(edges):
            kind = "S"
        else:
            split = _find_split(edges)
            if split is None:
                kind = "R"
            else:
                u, v, side = split
                side_ids = {e[0] for e in side}
                other = [e for e in edges if e[0] not in side_ids]
                vid = next_virtual
                next_virtual += 1
                virtual_ids.add(vid)
                twins_half[vid] = []
                work.append(side + [(vid, u, v)])
                work.append(other + [(vid, u, v)])
                continue
        sid = next_sid
        next_sid += 1
        skeletons[sid] = Skeleton(
            sid,
            kind,
            [SkelEdge(e, u, v, e in virtual_ids) for e, u, v in edges],
        )
        for e, _, _ in edges:
            if e in virtual_ids:
                twins_half[e].append(sid)

    twins = {vid: (a, b) for vid, (a, b) in twins_half.items()}
    tree = SpqrTree(skeletons, twins)
    _merge_same_type(tree)
    return tree


def _merge_same_type(tree: SpqrTree) -> None:
    """Merge adjacent S-S and P-P skeletons to obtain the canonical tree."""
    changed = True
    while changed:
        changed = False
        for vid, (a, b) in list(tree.twins.items()):
            if a == b:
                continue
            ka, kb = tree.skeletons[a].kind, tree.skeletons[b].kind
            if ka != kb or ka == "R":
                continue
            sa, sb = tree.skeletons[a], tree.skeletons[b]
            merged = [e for e in sa.edges + sb.edges if e.eid != vid]
            sa.edges = merged
            del tree.skeletons[b]
            del tree.twins[vid]
            for ovid, (x, y) in list(tree.twins.items()):
                tree.twins[ovid] = (
                    a if x == b else x,
                    a if y == b else y,
                )
            changed = True
            break


def glue(tree: SpqrTree) -> Graph:
    """Re-glue all skeletons along virtual edges; inverse of decomposition."""
    edges: list[SkelEdge] = []
    for sk in tree.skeletons.values():
        edges.extend(sk.edges)
    real = [e for e in edges if not e.virtual]
    verts = sorted({x for e in real for x in (e.u, e.v)})
    return Graph(tuple(verts), tuple((e.eid, e.u, e.v) for e in real))


def validate_tree(tree: SpqrTree, g: Graph) -> None:
    """Structural checks: skeleton shapes and re-glue identity (test support)."""
    for sk in tree.skeletons.values():
        pairs = [(e, u, v) for (e, u, v) in ((e.eid, e.u, e.v) for e in sk.edges)]
        if sk.kind == "S":
            assert _is_cycle(pairs), f"S-skeleton {sk.sid} is not a cycle"
        elif sk.kind == "P":
            assert len(sk.vertices) == 2 and len(sk.edges) >= 3
        else:
            ids = {}
            simple = True
            for e in sk.edges:
                key = (min(e.u, e.v), max(e.u, e.v))
                simple = simple and key not in ids
                ids[key] = e
            assert simple and len(sk.vertices) >= 4, "bad R-skeleton"
            assert _find_split(pairs) is None, "R-skeleton has a split pair"
    glued = glue(tree)
    assert sorted(glued.edges) == sorted(g.edges)
    # no two adjacent skeletons of equal mergeable type
    for vid, (a, b) in tree.twins.items():
        ka, kb = tree.skeletons[a].kind, tree.skeletons[b].kind
        assert not (ka == kb and ka in ("S", "P")), "unmerged adjacent skeletons"
