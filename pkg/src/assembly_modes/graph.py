"""Planar bar-linkage graphs, Henneberg constructions and Laman checks.

Vertices carry 1-based labels. Edges are stored as sorted pairs so two
graphs with the same edge set compare equal regardless of input order.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Iterable

Edge = tuple[int, int]


def _edge(i: int, j: int) -> Edge:
    if i == j:
        raise ValueError(f"self-loop at vertex {i}")
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class LinkageGraph:
    """Vertex count plus an immutable set of unordered edges."""

    n: int
    edges: frozenset[Edge] = field(default_factory=frozenset)

    def __init__(self, n: int, edges: Iterable[Iterable[int]] = ()):
        if n < 1:
            raise ValueError("a linkage needs at least one vertex")
        canon: set[Edge] = set()
        for pair in edges:
            i, j = pair
            e = _edge(int(i), int(j))
            if not (1 <= e[0] and e[1] <= n):
                raise ValueError(f"edge {e} outside vertex range 1..{n}")
            if e in canon:
                raise ValueError(f"duplicate edge {e}")
            canon.add(e)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "edges", frozenset(canon))

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def has_edge(self, i: int, j: int) -> bool:
        return _edge(i, j) in self.edges

    def non_edges(self) -> list[Edge]:
        return [e for e in combinations(self.vertices, 2) if e not in self.edges]

    def neighbours(self, v: int) -> set[int]:
        return {b if a == v else a for a, b in self.edges if v in (a, b)}

    def induced_edge_count(self, verts: Iterable[int]) -> int:
        vs = set(verts)
        return sum(1 for a, b in self.edges if a in vs and b in vs)

    def relabel(self, perm: dict[int, int]) -> "LinkageGraph":
        """Image of the graph under a vertex permutation (missing keys are fixed)."""
        return LinkageGraph(self.n, [(perm.get(a, a), perm.get(b, b)) for a, b in self.edges])

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "edges": [list(e) for e in self.sorted_edges()]})

    @classmethod
    def from_json(cls, text: str) -> "LinkageGraph":
        data = json.loads(text)
        return cls(data["n"], data["edges"])


class StepKind(str, Enum):
    H1 = "H1"
    H2 = "H2"


@dataclass(frozen=True)
class HennebergStep:
    """One Henneberg move.

    ``attach`` holds two vertices for H1 and three for H2; ``removed`` is the
    H2 edge that gets deleted and must join two of the attach vertices.
    """

    kind: StepKind
    attach: tuple[int, ...]
    removed: Edge | None = None

    def __post_init__(self):
        kind = StepKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if len(set(self.attach)) != len(self.attach):
            raise ValueError("attach vertices must be distinct")
        if kind is StepKind.H1:
            if len(self.attach) != 2 or self.removed is not None:
                raise ValueError("H1 attaches to exactly two vertices and removes nothing")
        else:
            if len(self.attach) != 3 or self.removed is None:
                raise ValueError("H2 attaches to three vertices and removes one edge")
            rem = _edge(*self.removed)
            if not set(rem) <= set(self.attach):
                raise ValueError("H2 removed edge must join two attach vertices")
            object.__setattr__(self, "removed", rem)


def apply_henneberg(g: LinkageGraph, step: HennebergStep) -> LinkageGraph:
    """Add vertex ``n+1`` to ``g`` with the given Henneberg move."""
    missing = [v for v in step.attach if not 1 <= v <= g.n]
    if missing:
        raise ValueError(f"attach vertices {missing} not in graph")
    new = g.n + 1
    edges = set(g.edges)
    if step.kind is StepKind.H2:
        if step.removed not in edges:
            raise ValueError(f"H2 removed edge {step.removed} is absent")
        edges.remove(step.removed)
    edges.update(_edge(v, new) for v in step.attach)
    return LinkageGraph(new, edges)


def is_laman(g: LinkageGraph) -> bool:
    """Exhaustive Laman test: 2n-3 edges and no overbraced induced subgraph."""
    if g.n < 2:
        return False
    if len(g.edges) != 2 * g.n - 3:
        return False
    for k in range(3, g.n):
        for verts in combinations(g.vertices, k):
            if g.induced_edge_count(verts) > 2 * k - 3:
                return False
    return True


def pebble_game_is_laman(g: LinkageGraph) -> bool:
    """(2,3)-pebble game; agrees with :func:`is_laman` and runs in polynomial time."""
    if len(g.edges) != 2 * g.n - 3:
        return False
    pebbles = {v: 2 for v in g.vertices}
    out: dict[int, list[int]] = {v: [] for v in g.vertices}

    def find_pebble(start: int, blocked: set[int]) -> bool:
        # DFS along directed edges for a free pebble, reversing the path found
        seen = set(blocked) | {start}
        stack = [(start, iter(out[start]))]
        parent: dict[int, int] = {}
        while stack:
            v, it = stack[-1]
            w = next(it, None)
            if w is None:
                stack.pop()
                continue
            if w in seen:
                continue
            seen.add(w)
            parent[w] = v
            if pebbles[w] > 0:
                pebbles[w] -= 1
                node = w
                while node != start:
                    p = parent[node]
                    out[p].remove(node)
                    out[node].append(p)
                    node = p
                pebbles[start] += 1
                return True
            stack.append((w, iter(out[w])))
        return False

    for u, v in g.sorted_edges():
        while pebbles[u] + pebbles[v] < 4:
            if pebbles[u] < 2 and find_pebble(u, {v}):
                continue
            if pebbles[v] < 2 and find_pebble(v, {u}):
                continue
            return False
        pebbles[u] -= 1
        out[u].append(v)
    return True


class TopologyId(str, Enum):
    V17 = "V17"
    V37 = "V37"
    V67 = "V67"

    @classmethod
    def parse(cls, text: str | "TopologyId") -> "TopologyId":
        if isinstance(text, TopologyId):
            return text
        try:
            return cls(str(text).upper())
        except ValueError:
            raise ValueError(f"unknown topology {text!r}; expected one of v17, v37, v67") from None


#: The Desargues linkage (planar parallel robot): triangles 123, 456 joined by legs 14, 25, 36.
DESARGUES = LinkageGraph(6, [(1, 2), (1, 3), (2, 3), (4, 5), (4, 6), (5, 6), (1, 4), (2, 5), (3, 6)])

_THIRD_ATTACH = {TopologyId.V17: 1, TopologyId.V37: 3, TopologyId.V67: 6}


def builtin_topology(topology: TopologyId | str) -> LinkageGraph:
    """The three 11-bar graphs obtained from the Desargues linkage by one H2 step.

    Edge (4,5) is removed and vertex 7 joined to 4, 5 and one of 1, 3, 6.
    """
    tid = TopologyId.parse(topology)
    third = _THIRD_ATTACH[tid]
    return apply_henneberg(DESARGUES, HennebergStep(StepKind.H2, (4, 5, third), (4, 5)))


#: Automorphism of V17 swapping the two halves of the linkage.
V17_AUTOMORPHISM = {2: 3, 3: 2, 5: 6, 6: 5, 4: 7, 7: 4}

# Rows of the bounds table for n <= 10 (upper, lower).
_BOUNDS_TABLE = {
    3: (2, 2), 4: (4, 4), 5: (8, 8), 6: (24, 24),
    7: (64, 48), 8: (128, 96), 9: (512, 288), 10: (2048, 576),
}


@dataclass(frozen=True)
class ClosedFormBounds:
    n: int
    bezout: int
    general_upper: float
    fan_lower: int
    table_upper: int | None = None
    table_lower: int | None = None

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "bezout": self.bezout,
            "general_upper": self.general_upper,
            "fan_lower": self.fan_lower,
            "table_upper": self.table_upper,
            "table_lower": self.table_lower,
        }


def fan_lower_bound(n: int) -> int:
    """Assembly modes of the fan of 11-bar sub-linkages sharing one triangle."""
    return 2 * 28 ** ((n - 3) // 4)


def closed_form_bounds(n: int) -> ClosedFormBounds:
    if n < 3:
        raise ValueError("bounds are defined for n >= 3")
    upper, lower = _BOUNDS_TABLE.get(n, (None, None))
    return ClosedFormBounds(
        n=n,
        bezout=4 ** (n - 2),
        general_upper=4 ** (n - 2) / math.sqrt(math.pi * (n - 2)),
        fan_lower=fan_lower_bound(n),
        table_upper=upper,
        table_lower=lower,
    )


#: Growth constant of the fan lower bound, 28 ** (1/4).
FAN_GROWTH_CONSTANT = 28 ** 0.25
