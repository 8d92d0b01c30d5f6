"""Newton polytopes, mixed volumes and root-count bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations
from typing import Iterable, Sequence

import numpy as np

from .polynomial import Polynomial
from .polytope import ConvexHull, minkowski_sum, polytope_vertices


@dataclass(frozen=True)
class NewtonPolytope:
    """Support of a polynomial and the extreme points of its hull."""

    dim: int
    points: frozenset[tuple[int, ...]]
    vertices: frozenset[tuple[int, ...]]


def newton_polytope(p: Polynomial | Iterable[Sequence[int]], variables: Sequence[str] | None = None) -> NewtonPolytope:
    """Newton polytope of ``p`` (or of a raw support).

    ``variables`` projects the support onto a subset of the variables, the
    others being treated as coefficients.
    """
    if isinstance(p, Polynomial):
        if p.is_zero():
            raise ValueError("the zero polynomial has no Newton polytope")
        support = p.support(variables)
    else:
        support = frozenset(tuple(int(x) for x in e) for e in p)
        if not support:
            raise ValueError("empty support")
    dim = len(next(iter(support)))
    verts = polytope_vertices(sorted(support))
    return NewtonPolytope(dim, support, frozenset(tuple(int(x) for x in v) for v in verts))


@dataclass
class MixedVolumeReport:
    mv: int
    subset_volumes: dict[tuple[int, ...], Fraction] = field(default_factory=dict)


def _vertex_array(poly) -> np.ndarray:
    if isinstance(poly, NewtonPolytope):
        return np.array(sorted(poly.vertices), dtype=object)
    return polytope_vertices(sorted(tuple(p) for p in poly))


def mixed_volume_report(polytopes: Sequence) -> MixedVolumeReport:
    """Lattice mixed volume by inclusion-exclusion over Minkowski sums.

    ``MV = sum over non-empty S of (-1)^(n-|S|) * Vol(sum_{i in S} P_i)``,
    which gives ``MV(P, ..., P) = n! Vol(P)``. ``subset_volumes`` holds the
    Euclidean volumes of the partial sums.
    """
    n = len(polytopes)
    arrays = [_vertex_array(p) for p in polytopes]
    if any(a.shape[1] != n for a in arrays):
        raise ValueError(f"mixed volume needs {n} polytopes in dimension {n}")
    sums: dict[tuple[int, ...], np.ndarray] = {}
    vols: dict[tuple[int, ...], int] = {}
    total = 0
    for size in range(1, n + 1):
        for subset in combinations(range(n), size):
            if size == 1:
                verts = arrays[subset[0]]
            else:
                verts = minkowski_sum(sums[subset[:-1]], arrays[subset[-1]])
            sums[subset] = verts
            hull = ConvexHull(verts)
            vol = Fraction(hull.normalized_volume, math.factorial(n) * hull.scale**n)
            vols[subset] = vol
            total += (-1) ** (n - size) * vol
    if total.denominator != 1 and all(isinstance(x, (int, np.integer)) for a in arrays for x in a.flat):
        raise ArithmeticError(f"non-integral lattice mixed volume {total}")
    mv = int(total) if total.denominator == 1 else total
    return MixedVolumeReport(mv, {k: v for k, v in vols.items()})


def mixed_volume(polytopes: Sequence) -> int:
    """Normalised mixed volume of n polytopes in R^n (Newton polytopes or point sets)."""
    return mixed_volume_report(polytopes).mv


def canonical_supports(supports: Sequence[Iterable[tuple[int, ...]]]) -> tuple[frozenset, ...]:
    """Representative of a support tuple under reordering of polynomials and
    simultaneous permutation of coordinates, both of which fix the mixed volume."""
    sups = [sorted(tuple(e) for e in s) for s in supports]
    n = len(sups[0][0])
    best = None
    for perm in permutations(range(n)):
        key = tuple(sorted(tuple(sorted(tuple(e[p] for p in perm) for e in s)) for s in sups))
        if best is None or key < best:
            best = key
    return tuple(frozenset(s) for s in best)


class MixedVolumeCache:
    """Mixed volumes keyed by support, reusing Minkowski-sum volumes across systems."""

    def __init__(self):
        self._vertices: dict[frozenset, np.ndarray] = {}
        self._sum_vertices: dict[frozenset, np.ndarray] = {}
        self._sum_volume: dict[frozenset, int] = {}
        self._mv: dict[tuple, int] = {}

    def _verts(self, support: frozenset) -> np.ndarray:
        if support not in self._vertices:
            self._vertices[support] = polytope_vertices(sorted(support))
        return self._vertices[support]

    def _sum(self, key: tuple[frozenset, ...]) -> np.ndarray:
        fkey = frozenset(key) if len(set(key)) == len(key) else None
        if fkey is not None and fkey in self._sum_vertices:
            return self._sum_vertices[fkey]
        if len(key) == 1:
            verts = self._verts(key[0])
        else:
            verts = minkowski_sum(self._sum(key[:-1]), self._verts(key[-1]))
        if fkey is not None:
            self._sum_vertices[fkey] = verts
        return verts

    def _volume(self, key: tuple[frozenset, ...]) -> int:
        fkey = frozenset(key) if len(set(key)) == len(key) else None
        if fkey is not None and fkey in self._sum_volume:
            return self._sum_volume[fkey]
        vol = ConvexHull(self._sum(key)).normalized_volume
        if fkey is not None:
            self._sum_volume[fkey] = vol
        return vol

    def mixed_volume(self, supports: Sequence[frozenset]) -> int:
        key = canonical_supports(supports)
        if key in self._mv:
            return self._mv[key]
        n = len(key)
        total = 0
        for size in range(1, n + 1):
            for subset in combinations(range(n), size):
                total += (-1) ** (n - size) * self._volume(tuple(key[i] for i in subset))
        mv, rem = divmod(total, math.factorial(n))
        if rem:
            raise ArithmeticError(f"non-integral lattice mixed volume {total}/{math.factorial(n)}")
        self._mv[key] = mv
        return mv


def system_mixed_volume(polys: Sequence[Polynomial], variables: Sequence[str] | None = None) -> int:
    """Mixed volume of the Newton polytopes of a square system."""
    names = list(variables) if variables is not None else list(polys[0].variables)
    if len(polys) != len(names):
        raise ValueError("system is not square")
    return mixed_volume([newton_polytope(p, names) for p in polys])


def bezout_bound(system: Sequence[Polynomial], variables: Sequence[str] | None = None) -> int:
    """Product of total degrees (in ``variables`` when given)."""
    total = 1
    for p in system:
        if variables is None:
            total *= p.total_degree()
        else:
            total *= max(sum(e) for e in p.support(variables))
    return total
