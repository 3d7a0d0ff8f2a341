"""Seeded instance generators: random in-budget fixtures for differential
fuzzing and parametric families for the scaling benchmark."""

from __future__ import annotations

import random

from .graph import (
    FlatClusteredGraph,
    Graph,
    PolyLinkCluster,
    SideAnnotation,
    is_biconnected,
)

NODETRIX_SIDE_NAMES = ("T", "R", "B", "L")


def _random_frame_shape(rng, n_clusters, max_edges):
    """Multiset of cluster-id pairs giving a biconnected frame."""
    if n_clusters == 2:
        k = rng.randrange(2, max_edges + 1)
        return [(0, 1)] * k
    pairs = [(i, (i + 1) % n_clusters) for i in range(n_clusters)]
    while len(pairs) < max_edges and rng.random() < 0.5:
        u, v = rng.sample(range(n_clusters), 2)
        pairs.append((u, v))
    return pairs[:max_edges]


def random_nodetrix_instance(rng, max_clusters=3, max_cluster_size=2,
                             max_edges=6) -> FlatClusteredGraph:
    """Random flat clustered graph with T/R/B/L annotations and a
    biconnected frame."""
    while True:
        n_clusters = rng.randrange(2, max_clusters + 1)
        sizes = [rng.randrange(1, max_cluster_size + 1)
                 for _ in range(n_clusters)]
        vertices = []
        clusters = []
        vid = 0
        for cid, size in enumerate(sizes):
            members = list(range(vid, vid + size))
            vid += size
            vertices.extend(members)
            clusters.append((cid, tuple(members)))
        cluster_members = {cid: vs for cid, vs in clusters}
        shape = _random_frame_shape(rng, n_clusters,
                                    rng.randrange(2, max_edges + 1))
        edges = []
        sides = []
        for eid, (cu, cv) in enumerate(shape):
            u = rng.choice(cluster_members[cu])
            v = rng.choice(cluster_members[cv])
            edges.append((eid, u, v))
            sides.append(SideAnnotation(eid, u, rng.choice(NODETRIX_SIDE_NAMES)))
            sides.append(SideAnnotation(eid, v, rng.choice(NODETRIX_SIDE_NAMES)))
        g = Graph(tuple(vertices), tuple(edges))
        fcg = FlatClusteredGraph(g, tuple(clusters), tuple(sides))
        frame = Graph.build(range(n_clusters), shape)
        if is_biconnected(frame):
            return fcg


def random_polylink_instance(rng, max_clusters=3, max_cluster_size=3,
                             max_edges=6, sigmas=(2, 4)) -> FlatClusteredGraph:
    """Random PolyLink instance: per cluster an even polygon, disjoint
    vertex groups owning disjoint antipodal pairs, endpoint sides within
    the owning pair."""
    while True:
        n_clusters = rng.randrange(2, max_clusters + 1)
        sizes = [rng.randrange(1, max_cluster_size + 1)
                 for _ in range(n_clusters)]
        vertices = []
        clusters = []
        polylink = []
        side_choice = {}
        vid = 0
        for cid, size in enumerate(sizes):
            members = list(range(vid, vid + size))
            vid += size
            vertices.extend(members)
            clusters.append((cid, tuple(members)))
            sigma = rng.choice(sigmas)
            half = sigma // 2
            all_pairs = [(s, s + half) for s in range(half)]
            rng.shuffle(all_pairs)
            groups = []
            rest = list(members)
            rng.shuffle(rest)
            while rest and all_pairs:
                take = rng.randrange(1, len(rest) + 1)
                grp, rest = rest[:take], rest[take:]
                n_pairs = rng.randrange(1, len(all_pairs) + 1)
                pairs, all_pairs = all_pairs[:n_pairs], all_pairs[n_pairs:]
                groups.append((tuple(sorted(grp)), tuple(sorted(pairs))))
            if rest:
                grp, pairs = groups[-1]
                groups[-1] = (tuple(sorted(grp + tuple(rest))), pairs)
            polylink.append(PolyLinkCluster(cid, sigma, tuple(groups)))
            for grp, pairs in groups:
                for v in grp:
                    side_choice[v] = [s for pr in pairs for s in pr]
        shape = _random_frame_shape(rng, n_clusters,
                                    rng.randrange(2, max_edges + 1))
        cluster_members = {cid: vs for cid, vs in clusters}
        edges = []
        sides = []
        for eid, (cu, cv) in enumerate(shape):
            u = rng.choice(cluster_members[cu])
            v = rng.choice(cluster_members[cv])
            edges.append((eid, u, v))
            sides.append(SideAnnotation(eid, u, rng.choice(side_choice[u])))
            sides.append(SideAnnotation(eid, v, rng.choice(side_choice[v])))
        g = Graph(tuple(vertices), tuple(edges))
        fcg = FlatClusteredGraph(g, tuple(clusters), tuple(sides),
                                 tuple(polylink))
        frame = Graph.build(range(n_clusters), shape)
        if is_biconnected(frame):
            return fcg


def random_clique_instance(rng, max_clusters=3, max_cluster_size=3,
                           max_edges=5) -> FlatClusteredGraph:
    """Clusters are cliques; annotations use square sides T/R/B/L."""
    while True:
        n_clusters = rng.randrange(2, max_clusters + 1)
        sizes = [rng.randrange(1, max_cluster_size + 1)
                 for _ in range(n_clusters)]
        vertices = []
        clusters = []
        intra = []
        vid = 0
        for cid, size in enumerate(sizes):
            members = list(range(vid, vid + size))
            vid += size
            vertices.extend(members)
            clusters.append((cid, tuple(members)))
            for i in range(size):
                for j in range(i + 1, size):
                    intra.append((members[i], members[j]))
        cluster_members = {cid: vs for cid, vs in clusters}
        shape = _random_frame_shape(rng, n_clusters,
                                    rng.randrange(2, max_edges + 1))
        edges = []
        sides = []
        eid = 0
        for cu, cv in shape:
            u = rng.choice(cluster_members[cu])
            v = rng.choice(cluster_members[cv])
            edges.append((eid, u, v))
            sides.append(SideAnnotation(eid, u, rng.choice(NODETRIX_SIDE_NAMES)))
            sides.append(SideAnnotation(eid, v, rng.choice(NODETRIX_SIDE_NAMES)))
            eid += 1
        for u, v in intra:
            edges.append((eid, u, v))
            eid += 1
        g = Graph(tuple(vertices), tuple(edges))
        fcg = FlatClusteredGraph(g, tuple(clusters), tuple(sides))
        frame = Graph.build(range(n_clusters), shape)
        if is_biconnected(frame):
            return fcg


# ---------------------------------------------------------------------------
# Benchmark families
# ---------------------------------------------------------------------------


def cycle_of_clusters(n: int) -> FlatClusteredGraph:
    """n two-row clusters in a ring; consecutive clusters joined by two
    row-to-row edges, left sides facing right sides, so every cluster has an
    active row-coherence constraint."""
    clusters = []
    vertices = []
    for i in range(n):
        clusters.append((i, (2 * i, 2 * i + 1)))
        vertices.extend((2 * i, 2 * i + 1))
    edges = []
    sides = []
    eid = 0
    for i in range(n):
        j = (i + 1) % n
        for row in range(2):
            u, v = 2 * i + row, 2 * j + row
            edges.append((eid, u, v))
            sides.append(SideAnnotation(eid, u, "R"))
            sides.append(SideAnnotation(eid, v, "L"))
            eid += 1
    g = Graph(tuple(vertices), tuple(edges))
    return FlatClusteredGraph(g, tuple(clusters), tuple(sides))


def grid_frame(n: int) -> FlatClusteredGraph:
    """Ladder of 2xn singleton clusters (biconnected frame of 4-cycles)."""
    n = max(n, 2)
    clusters = tuple((i, (i,)) for i in range(2 * n))
    edges = []
    sides = []
    eid = 0

    def add(u, v, su, sv):
        nonlocal eid
        edges.append((eid, u, v))
        sides.append(SideAnnotation(eid, u, su))
        sides.append(SideAnnotation(eid, v, sv))
        eid += 1

    for i in range(n - 1):
        add(2 * i, 2 * (i + 1), "R", "L")          # top rail
        add(2 * i + 1, 2 * (i + 1) + 1, "R", "L")  # bottom rail
    for i in range(n):
        add(2 * i, 2 * i + 1, "B", "T")            # rungs
    g = Graph(tuple(range(2 * n)), tuple(edges))
    return FlatClusteredGraph(g, clusters, tuple(sides))


def parallel_bundles(n: int) -> FlatClusteredGraph:
    """Two clusters of two rows joined by n parallel edges, alternating
    between the rows."""
    clusters = ((0, (0, 1)), (1, (2, 3)))
    edges = []
    sides = []
    for e in range(max(n, 2)):
        u = e % 2
        v = 2 + e % 2
        edges.append((e, u, v))
        sides.append(SideAnnotation(e, u, "R"))
        sides.append(SideAnnotation(e, v, "L"))
    g = Graph((0, 1, 2, 3), tuple(edges))
    return FlatClusteredGraph(g, clusters, tuple(sides))


BENCH_FAMILIES = {
    "cycle-of-clusters": cycle_of_clusters,
    "grid-frame": grid_frame,
    "parallel-bundles": parallel_bundles,
}
