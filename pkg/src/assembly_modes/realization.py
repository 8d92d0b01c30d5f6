"""Planar coordinates from distance solutions, Cayley-Menger checks and SVG output."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .distance import (
    V17_CANONICAL_VARIABLES,
    V17_PLACEMENT_ORDER,
    DistanceAssignment,
)
from .graph import Edge

TRILATERATION_TOL = 1e-6


class Infeasible(Exception):
    """A distance solution that satisfies the minors but has no planar realization."""


class NonGeneric(Exception):
    """Both circle intersections match the check distance."""


@dataclass
class Embedding:
    """Planar coordinates for vertices 1..n (row k is vertex k+1)."""

    coords: np.ndarray
    orientation: int
    max_residual: float
    edges: list[Edge] = field(default_factory=list)

    def distance(self, i: int, j: int) -> float:
        return float(np.linalg.norm(self.coords[i - 1] - self.coords[j - 1]))

    def mirrored(self) -> "Embedding":
        flipped = self.coords * np.array([1.0, -1.0])
        return Embedding(flipped, -self.orientation, self.max_residual, list(self.edges))

    def pairwise_squared(self) -> dict[Edge, float]:
        n = len(self.coords)
        return {(i, j): self.distance(i, j) ** 2 for i, j in combinations(range(1, n + 1), 2)}

    def to_dict(self) -> dict:
        return {
            "coords": self.coords.tolist(),
            "orientation": self.orientation,
            "max_residual": self.max_residual,
            "edges": [list(e) for e in self.edges],
        }


def _key(i: int, j: int) -> Edge:
    return (i, j) if i < j else (j, i)


def _circle_intersections(c1: np.ndarray, r1: float, c2: np.ndarray, r2: float) -> tuple[np.ndarray, np.ndarray]:
    d = float(np.linalg.norm(c2 - c1))
    if d == 0.0:
        raise Infeasible("coincident circle centres")
    a = (r1 * r1 - r2 * r2 + d * d) / (2 * d)
    h2 = r1 * r1 - a * a
    if h2 < 0:
        if h2 < -TRILATERATION_TOL * max(r1 * r1, d * d):
            raise Infeasible("circles do not intersect")
        h2 = 0.0
    h = math.sqrt(h2)
    u = (c2 - c1) / d
    base = c1 + a * u
    perp = np.array([-u[1], u[0]])
    return base + h * perp, base - h * perp


def reconstruct_embedding(
    lengths: DistanceAssignment,
    solution: Mapping[Edge, float] | Sequence[float],
    order: Sequence[int] = V17_PLACEMENT_ORDER,
    variables: Sequence[Edge] = V17_CANONICAL_VARIABLES,
    tol: float = TRILATERATION_TOL,
) -> Embedding:
    """Place vertices one by one from squared distances.

    ``solution`` gives the squared unknown distances (a mapping or a vector
    in ``variables`` order). The first three vertices of ``order`` form the
    base triangle with positive orientation; every later vertex is put on the
    intersection of two circles around placed neighbours, the candidate
    matching a third distance is kept, and finally every prescribed distance
    is re-checked. Raises :class:`Infeasible` when no planar realization
    exists.
    """
    if isinstance(solution, Mapping):
        values = {_key(*e): float(v) for e, v in solution.items()}
    else:
        values = {_key(*e): float(np.real(v)) for e, v in zip(variables, solution)}
    known = {e: float(lengths.squared(e)) for e in lengths}
    sq = dict(known)
    for e, v in values.items():
        if v <= 0:
            raise Infeasible(f"non-positive squared distance on {e}")
        sq[e] = v
    var_set = set(values)

    def dist(i, j):
        return math.sqrt(sq[_key(i, j)])

    scale = math.sqrt(max(sq.values()))
    n = max(order)
    pos: dict[int, np.ndarray] = {}
    a, b, c = order[:3]
    for e in ((a, b), (a, c), (b, c)):
        if _key(*e) not in sq:
            raise ValueError(f"base triangle edge {e} has no distance")
    pos[a] = np.zeros(2)
    pos[b] = np.array([dist(a, b), 0.0])
    p, q = _circle_intersections(pos[a], dist(a, c), pos[b], dist(b, c))
    pos[c] = p if p[1] >= q[1] else q
    if abs(pos[c][1]) <= tol * scale:
        raise ValueError("degenerate (collinear) base triangle")

    for v in order[3:]:
        placed = [u for u in order if u in pos and _key(u, v) in sq]
        # prescribed bars first, then solved distances, then placement order
        placed.sort(key=lambda u: (_key(u, v) in var_set, order.index(u)))
        if len(placed) < 3:
            raise ValueError(f"vertex {v} has fewer than three placed neighbours")
        triple = placed[:3]
        pairs = sorted(combinations(triple, 2), key=lambda uv: -np.linalg.norm(pos[uv[0]] - pos[uv[1]]))
        u1, u2 = pairs[0]
        u3 = next(u for u in triple if u not in (u1, u2))
        p, q = _circle_intersections(pos[u1], dist(u1, v), pos[u2], dist(u2, v))
        target = dist(u3, v)
        ep = abs(np.linalg.norm(p - pos[u3]) - target)
        eq = abs(np.linalg.norm(q - pos[u3]) - target)
        thresh = tol * max(target, scale * 1e-3)
        if ep > thresh and eq > thresh:
            raise Infeasible(f"vertex {v}: neither intersection matches d({u3},{v})")
        if ep <= thresh and eq <= thresh and np.linalg.norm(p - q) > thresh:
            raise NonGeneric(f"vertex {v}: both intersections match d({u3},{v})")
        pos[v] = p if ep <= eq else q

    coords = np.array([pos[k] for k in range(1, n + 1)])
    worst = 0.0
    for (i, j), c2 in sq.items():
        target = math.sqrt(c2)
        err = abs(np.linalg.norm(coords[i - 1] - coords[j - 1]) - target) / target
        if (i, j) in var_set and err > tol:
            raise Infeasible(f"solved distance ({i},{j}) inconsistent with the placement")
        if (i, j) not in var_set:
            worst = max(worst, err)
    if worst > tol:
        raise Infeasible("prescribed bar lengths not reproduced")
    return Embedding(coords, 1, worst, sorted(known))


@dataclass
class CayleyMengerReport:
    rank: int
    singular_values: list[float]
    sign_conditions: bool
    vanishing: bool
    min_triangle_minor: float
    max_scaled_planar_minor: float
    triangle_123: float

    @property
    def embeddable(self) -> bool:
        return self.rank == 4 and self.sign_conditions and self.vanishing

    def to_dict(self) -> dict:
        return {**self.__dict__, "embeddable": self.embeddable}


def cayley_menger_numeric(points: np.ndarray) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    B = np.ones((n + 1, n + 1))
    B[0, 0] = 0.0
    diff = pts[:, None, :] - pts[None, :, :]
    B[1:, 1:] = (diff**2).sum(axis=-1)
    return B


def verify_cayley_menger(points, tol: float = 1e-9) -> CayleyMengerReport:
    """Numerical check of the rank and sign conditions for planar point sets.

    Minors of k points are scaled by ``L**(2(k-1))`` with ``L`` the largest
    squared distance, so ``tol`` is relative.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n < 3:
        raise ValueError("need at least three points")
    B = cayley_menger_numeric(pts)
    L = float(B[1:, 1:].max()) or 1.0  # coincident points: nothing to scale
    sv = np.linalg.svd(B, compute_uv=False)
    rank = int((sv > tol * sv[0] * 10).sum())

    def minor(idx):
        rows = [0] + [i for i in idx]
        return float(np.linalg.det(B[np.ix_(rows, rows)]))

    ok = bool(np.all(B[1:, 1:] >= 0))  # k = 2: every squared distance is non-negative
    min_tri = math.inf
    for tri in combinations(range(1, n + 1), 3):
        d = minor(tri) / L**2
        min_tri = min(min_tri, -d)
        if d > tol:  # (-1)^3 D >= 0
            ok = False
    worst = 0.0
    for k in (4, 5):
        for sub in combinations(range(1, n + 1), k):
            worst = max(worst, abs(minor(sub)) / L ** (k - 1))
    return CayleyMengerReport(
        rank=rank,
        singular_values=sv.tolist(),
        sign_conditions=ok,
        vanishing=worst < tol,
        min_triangle_minor=min_tri,
        max_scaled_planar_minor=worst,
        triangle_123=minor((1, 2, 3)),
    )


def export_svg(
    embeddings: Sequence[Embedding],
    mirror: bool = False,
    columns: int | None = None,
    cell: int = 160,
    title: str | None = None,
) -> str:
    """Grid of assembly modes as an SVG 1.1 document.

    Each cell is scaled to the bounding box of its configuration. With
    ``mirror`` every embedding is followed by its reflection in the
    horizontal axis. Output is byte-for-byte deterministic.
    """
    if not embeddings:
        raise ValueError("nothing to draw")
    items = []
    for e in embeddings:
        items.append(e)
        if mirror:
            items.append(e.mirrored())
    cols = columns or max(1, math.ceil(math.sqrt(len(items))))
    rows = math.ceil(len(items) / cols)
    pad = 14
    width, height = cols * cell, rows * cell + (24 if title else 0)
    top = 24 if title else 0
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{width / 2:.1f}" y="16" font-family="sans-serif" font-size="14" '
                   f'text-anchor="middle">{escape(title)}</text>')
    for k, emb in enumerate(items):
        r, c = divmod(k, cols)
        x0, y0 = c * cell, top + r * cell
        pts = emb.coords
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        span = max(float((hi - lo).max()), 1e-12)
        s = (cell - 2 * pad) / span
        centre = (lo + hi) / 2

        def xy(p):
            # SVG y grows downwards
            return (x0 + cell / 2 + (p[0] - centre[0]) * s, y0 + cell / 2 - (p[1] - centre[1]) * s)

        out.append(f'<g id="mode-{k + 1}">')
        out.append(f'<rect x="{x0 + 1}" y="{y0 + 1}" width="{cell - 2}" height="{cell - 2}" '
                   'fill="none" stroke="#ccc"/>')
        for i, j in emb.edges:
            (xa, ya), (xb, yb) = xy(pts[i - 1]), xy(pts[j - 1])
            out.append(f'<line x1="{xa:.2f}" y1="{ya:.2f}" x2="{xb:.2f}" y2="{yb:.2f}" '
                       'stroke="black" stroke-width="1.5"/>')
        for v, p in enumerate(pts, start=1):
            xa, ya = xy(p)
            out.append(f'<circle cx="{xa:.2f}" cy="{ya:.2f}" r="3" fill="#c33"/>')
            out.append(f'<text x="{xa + 4:.2f}" y="{ya - 4:.2f}" font-family="sans-serif" '
                       f'font-size="10">{v}</text>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def embeddings_json(embeddings: Sequence[Embedding]) -> str:
    return json.dumps([e.to_dict() for e in embeddings], indent=2)
