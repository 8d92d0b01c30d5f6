"""Exact convex hulls and volumes of lattice polytopes in low dimension.

The hull is built by beneath-beyond insertion. Every facet is a simplex with
an integer normal (a generalised cross product), so visibility tests and the
accumulated volume are exact integer computations. Rational inputs are scaled
to a common denominator first.
"""
from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

# int64 is exact while |coordinate spread| stays below this; beyond it we
# switch to Python integers (dtype=object).
_INT64_SPREAD_LIMIT = 1000


def _batch_det(m: np.ndarray) -> np.ndarray:
    """Integer determinants of a stack of k x k matrices by Laplace expansion."""
    k = m.shape[-1]
    if k == 0:
        return np.ones(m.shape[:-2], dtype=m.dtype)
    if k == 1:
        return m[..., 0, 0]
    if k == 2:
        return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    total = None
    for c in range(k):
        sub = np.delete(np.delete(m, 0, axis=-2), c, axis=-1)
        term = m[..., 0, c] * _batch_det(sub)
        if total is None:
            total = term
        elif c % 2:
            total = total - term
        else:
            total = total + term
    return total


def _exact_minor_dets(m: np.ndarray) -> np.ndarray:
    """Integer determinants of a stack of k x k integer matrices.

    LAPACK in double precision is used when the Hadamard bound guarantees the
    rounding error stays below 1/4, so rounding recovers the exact value;
    otherwise fall back to Laplace expansion on Python/numpy integers.
    """
    k = m.shape[-1]
    if m.dtype != object and k > 0 and m.shape[0]:
        mf = m.astype(float)
        hadamard = np.prod(np.sqrt((mf * mf).sum(axis=-1)), axis=-1).max()
        if hadamard * k * 2.0**k * 2.0**-52 < 0.25:
            return np.rint(np.linalg.det(mf)).astype(np.int64)
    return _batch_det(m)


def _normals(simplices: np.ndarray) -> np.ndarray:
    """Integer normals of hyperplanes through stacks of d points in R^d.

    ``simplices`` has shape (F, d, d); returns (F, d) with
    ``normal . (x - p0) = det[p1-p0, ..., p_{d-1}-p0, x-p0]``.
    """
    diffs = simplices[:, 1:, :] - simplices[:, :1, :]
    f, d = simplices.shape[0], simplices.shape[-1]
    cols = [[c for c in range(d) if c != k] for k in range(d)]
    stacked = np.stack([diffs[:, :, cols[k]] for k in range(d)], axis=1)  # (F, d, d-1, d-1)
    dets = _exact_minor_dets(stacked.reshape(f * d, d - 1, d - 1)).reshape(f, d)
    signs = np.array([1 if (d - 1 + k) % 2 == 0 else -1 for k in range(d)])
    return (dets * signs).astype(simplices.dtype)


def _to_integer_points(points) -> tuple[np.ndarray, int]:
    """Scale rational points to integers; returns (points, scale)."""
    pts = [tuple(p) for p in points]
    if not pts:
        raise ValueError("empty point set")
    if all(isinstance(x, (int, np.integer)) for p in pts for x in p):
        arr = np.array(pts, dtype=object)
        return arr, 1
    fr = [[Fraction(x) for x in p] for p in pts]
    scale = 1
    for p in fr:
        for x in p:
            scale = math.lcm(scale, x.denominator)
    arr = np.array([[int(x * scale) for x in p] for p in fr], dtype=object)
    return arr, scale


def _as_dtype(arr: np.ndarray) -> np.ndarray:
    spread = int(np.max(arr) - np.min(arr)) if arr.size else 0
    if spread <= _INT64_SPREAD_LIMIT and arr.shape[1] <= 5:
        return arr.astype(np.int64)
    return arr.astype(object)


def affine_basis(points: np.ndarray) -> list[int]:
    """Indices of a maximal affinely independent subset (greedy, exact)."""
    if len(points) == 0:
        return []
    base = [int(x) for x in points[0]]
    rows: list[tuple[int, list[int]]] = []  # (pivot column, reduced integer row)
    chosen = [0]
    d = points.shape[1]
    for idx in range(1, len(points)):
        v = [int(x) - b for x, b in zip(points[idx], base)]
        for piv, row in rows:
            if v[piv]:
                f, g = v[piv], row[piv]
                v = [g * a - f * b for a, b in zip(v, row)]
        piv = next((k for k, x in enumerate(v) if x), None)
        if piv is not None:
            g = math.gcd(*v)
            rows.append((piv, [x // g for x in v]))
            chosen.append(idx)
            if len(rows) == d:
                break
    return chosen


class ConvexHull:
    """Exact hull of integer points in R^d via beneath-beyond.

    Attributes
    ----------
    dim : int
        Affine dimension of the point set.
    normalized_volume : int
        ``d! * volume`` (zero when the set is not full-dimensional).
    """

    def __init__(self, points):
        arr, scale = _to_integer_points(points)
        arr = np.unique(_as_dtype(arr), axis=0)
        self.points = arr
        self.scale = scale
        self.ambient = arr.shape[1]
        basis = affine_basis(arr)
        self.dim = len(basis) - 1
        self._facet_verts = np.zeros((0, self.ambient), dtype=np.int64)
        self._normals = np.zeros((0, self.ambient), dtype=arr.dtype)
        self._offsets = np.zeros(0, dtype=arr.dtype)
        self.normalized_volume = 0
        if self.dim == self.ambient and self.ambient >= 1:
            self._build(basis)

    def _build(self, basis: list[int]) -> None:
        # translate to the origin so int64 products stay in range
        pts = self.points - self.points.min(axis=0)
        self._work = pts
        d = self.ambient
        # interior reference: (d+1) * centroid of the starting simplex
        centre = pts[basis].sum(axis=0)
        simplex = np.array(basis)
        start_det = int(_batch_det((pts[simplex[1:]] - pts[simplex[0]])[None])[0])
        total = abs(start_det)
        faces = np.sort(np.array([tuple(f) for f in combinations(simplex, d)], dtype=np.int64), axis=1)
        normals, offsets = self._oriented(faces, centre)

        # farthest points first keeps the intermediate hulls large
        order = np.argsort(-((pts * (d + 1) - centre) ** 2).sum(axis=1).astype(float), kind="stable")
        in_basis = set(basis)
        for idx in order:
            idx = int(idx)
            if idx in in_basis:
                continue
            p = pts[idx]
            height = normals @ p - offsets
            visible = height > 0
            if not visible.any():
                continue
            total += int(height[visible].sum())
            counts: dict[tuple, int] = {}
            for face in faces[visible].tolist():
                for k in range(d):
                    ridge = tuple(face[:k] + face[k + 1:])
                    counts[ridge] = counts.get(ridge, 0) + 1
            horizon = [r for r, c in counts.items() if c == 1]
            new_faces = np.sort(np.array([r + (idx,) for r in horizon], dtype=np.int64), axis=1)
            new_normals, new_offsets = self._oriented(new_faces, centre)
            keep = ~visible
            faces = np.concatenate([faces[keep], new_faces])
            normals = np.concatenate([normals[keep], new_normals])
            offsets = np.concatenate([offsets[keep], new_offsets])
        self._facet_verts = faces
        self._normals = normals
        self._offsets = offsets
        self.normalized_volume = total

    def _oriented(self, faces: np.ndarray, centre: np.ndarray):
        d = self.ambient
        simplices = self._work[faces]
        normals = _normals(simplices)
        offsets = np.einsum("fd,fd->f", normals, simplices[:, 0, :])
        side = normals @ centre - (d + 1) * offsets
        flip = side > 0
        normals[flip] = -normals[flip]
        offsets[flip] = -offsets[flip]
        if np.any(side == 0):
            raise ArithmeticError("degenerate facet through the interior point")
        return normals, offsets

    @property
    def volume(self) -> Fraction:
        """Euclidean volume in the caller's (unscaled) coordinates."""
        d = self.ambient
        return Fraction(self.normalized_volume, math.factorial(d) * self.scale**d)

    def vertex_indices(self) -> list[int]:
        """Indices into ``self.points`` of the extreme points.

        A boundary point is a vertex iff the normals of the facets through it
        span R^d.
        """
        if self.dim < self.ambient:
            raise ValueError("vertex_indices needs a full-dimensional hull; use polytope_vertices")
        d = self.ambient
        normals = self._normals
        g = np.gcd.reduce(np.abs(normals), axis=1) if normals.dtype != object else None
        if g is not None:
            normals = normals // g[:, None]
        out = []
        faces = self._facet_verts
        for v in np.unique(faces):
            rows = np.unique(normals[(faces == v).any(axis=1)], axis=0)
            if len(rows) >= d and _int_rank(rows, stop=d) == d:
                out.append(int(v))
        return out


def _int_rank(rows: np.ndarray, stop: int | None = None) -> int:
    """Exact rank of an integer matrix (fraction-free elimination).

    ``stop`` returns early once that rank is certain.
    """
    work = []
    for r in rows:
        v = [int(x) for x in r]
        g = math.gcd(*v)
        if g:
            v = [x // g for x in v]
            if v not in work and [-x for x in v] not in work:
                work.append(v)
    rank = 0
    ncols = len(work[0]) if work else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(work)) if work[i][col]), None)
        if piv is None:
            continue
        work[rank], work[piv] = work[piv], work[rank]
        p = work[rank]
        for i in range(rank + 1, len(work)):
            f = work[i][col]
            if f:
                row = [p[col] * a - f * b for a, b in zip(work[i], p)]
                g = math.gcd(*row)
                work[i] = [x // g for x in row] if g else row
        rank += 1
        if stop is not None and rank >= stop:
            break
    return rank


def _independent_columns(diffs: np.ndarray, rank: int) -> list[int]:
    cols: list[int] = []
    for c in range(diffs.shape[1]):
        if _int_rank(diffs[:, cols + [c]]) > len(cols):
            cols.append(c)
            if len(cols) == rank:
                break
    return cols


def polytope_vertices(points) -> np.ndarray:
    """Extreme points of conv(points), for point sets of any affine dimension.

    Lower-dimensional sets are projected onto coordinates that are injective
    on their affine hull, which preserves extremality.
    """
    arr, scale = _to_integer_points(points)
    arr = np.unique(_as_dtype(arr), axis=0)
    if len(arr) <= 1:
        return _rescale(arr, scale)
    basis = affine_basis(arr)
    dim = len(basis) - 1
    if dim == 0:
        return _rescale(arr[:1], scale)
    if dim == 1:
        direction = arr[basis[1]] - arr[basis[0]]
        proj = (arr - arr[basis[0]]) @ direction
        return _rescale(arr[[int(np.argmin(proj)), int(np.argmax(proj))]], scale)
    diffs = arr[basis[1:]] - arr[basis[0]]
    cols = _independent_columns(diffs, dim)
    hull = ConvexHull(arr[:, cols])
    # np.unique inside ConvexHull keeps a sorted copy; map back by projection
    proj = hull.points[hull.vertex_indices()]
    lookup = {tuple(int(x) for x in row[cols]): row for row in arr}
    verts = np.array([lookup[tuple(int(x) for x in p)] for p in proj])
    return _rescale(verts, scale)


def _rescale(arr: np.ndarray, scale: int) -> np.ndarray:
    if scale == 1:
        return arr
    return np.array([[Fraction(int(x), scale) for x in row] for row in arr], dtype=object)


def polytope_volume(points, dim: int | None = None) -> Fraction:
    """Exact Euclidean volume of conv(points); zero for degenerate sets."""
    pts = [tuple(p) for p in points]
    if not pts:
        raise ValueError("empty point set")
    if dim is not None and any(len(p) != dim for p in pts):
        raise ValueError(f"points do not live in dimension {dim}")
    return ConvexHull(pts).volume


def minkowski_sum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Vertices of conv(A) + conv(B)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[1] != b.shape[1]:
        raise ValueError("dimension mismatch in Minkowski sum")
    sums = (a[:, None, :] + b[None, :, :]).reshape(-1, a.shape[1])
    return polytope_vertices(sums)


def lattice_points_volume_sum(polys: Sequence[Iterable]) -> Fraction:
    """Volume of the Minkowski sum of the hulls of several point sets."""
    acc = None
    for p in polys:
        verts = polytope_vertices(list(p))
        acc = verts if acc is None else minkowski_sum(acc, verts)
    return polytope_volume(acc)
