"""Best-effort SVG rendering of hybrid planarity witnesses.

Clusters are placed on a circle; NodeTrix matrices are drawn as squares and
general clusters as sigma-gons, with vertex labels along each side in the
witness order.  Inter-cluster edges are straight polylines between their
attachment points; the witness guarantees a crossing-free combinatorial
embedding exists, the routing here is only illustrative.
"""

from __future__ import annotations

import math

from .hybrid import Witness


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _polygon_corners(cx, cy, sigma, radius):
    """Corner s..s+1 spans side s; side 0 is centered on top."""
    corners = []
    for j in range(sigma):
        ang = math.pi / 2 + math.pi / sigma + 2 * math.pi * j / sigma
        corners.append((cx + radius * math.cos(ang),
                        cy - radius * math.sin(ang)))
    return corners


def _side_point(corners, s, t):
    sigma = len(corners)
    (x1, y1), (x2, y2) = corners[s % sigma], corners[(s + 1) % sigma]
    return (x1 + (x2 - x1) * t, y1 + (y2 - y1) * t)


def render(witness: Witness) -> str:
    """Self-contained SVG text for a witness; deterministic for fixed input."""
    layouts = sorted(witness.clusters, key=lambda c: c.cluster)
    n = max(len(layouts), 1)
    ring_radius = 90.0 + 40.0 * n
    size = 2 * (ring_radius + 120.0)
    cx0 = cy0 = size / 2

    centers = {}
    for i, layout in enumerate(layouts):
        ang = 2 * math.pi * i / n
        centers[layout.cluster] = (cx0 + ring_radius * math.cos(ang),
                                   cy0 - ring_radius * math.sin(ang))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(size)}" '
        f'height="{_fmt(size)}" viewBox="0 0 {_fmt(size)} {_fmt(size)}">',
        '<style>text{font:10px sans-serif}ellipse,polygon{fill:#eef;'
        'stroke:#336}line{stroke:#933;stroke-width:1}</style>',
    ]

    attach: dict[tuple[int, int], tuple[float, float]] = {}
    for layout in layouts:
        cx, cy = centers[layout.cluster]
        sigma = max(layout.sigma, 3)
        radius = 45.0
        corners = _polygon_corners(cx, cy, sigma, radius)
        pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in corners)
        parts.append(f'<polygon points="{pts}"/>')
        parts.append(
            f'<text x="{_fmt(cx - 8)}" y="{_fmt(cy + 3)}">'
            f'C{layout.cluster}</text>'
        )
        for s, runs in sorted(layout.side_orders.items()):
            total = sum(len(es) for _, es in runs)
            pos = 0
            for v, es in runs:
                mid = (pos + len(es) / 2) / max(total, 1)
                lx, ly = _side_point(corners, s, mid)
                parts.append(
                    f'<text x="{_fmt(lx)}" y="{_fmt(ly)}">{v}</text>'
                )
                for e in es:
                    t = (pos + 0.5) / max(total, 1)
                    attach[(e, layout.cluster)] = _side_point(corners, s, t)
                    pos += 1

    by_edge: dict[int, list[tuple[float, float]]] = {}
    for (e, _), pt in sorted(attach.items()):
        by_edge.setdefault(e, []).append(pt)
    for e in sorted(by_edge):
        pts = by_edge[e]
        if len(pts) != 2:
            continue
        (x1, y1), (x2, y2) = pts
        parts.append(
            f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" '
            f'x2="{_fmt(x2)}" y2="{_fmt(y2)}"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
