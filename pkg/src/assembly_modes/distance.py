"""Cayley-Menger matrices, their diagonal minors and well-constrained minor systems.

Everything here is exact: known squared lengths are rationals and minors are
expanded symbolically.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .graph import Edge, LinkageGraph, TopologyId, builtin_topology
from .polynomial import Polynomial, determinant, fraction_determinant

#: Edge order behind the length-vector convention l_0 .. l_10 for V17.
V17_EDGE_ORDER: tuple[Edge, ...] = (
    (1, 2), (1, 3), (1, 4), (1, 7), (2, 3), (2, 5), (3, 6), (4, 6), (4, 7), (5, 6), (5, 7),
)


def pair_name(prefix: str, i: int, j: int) -> str:
    i, j = min(i, j), max(i, j)
    return f"{prefix}{i}{j}" if j < 10 else f"{prefix}{i}_{j}"


def unknown_name(i: int, j: int) -> str:
    return pair_name("x", i, j)


def known_name(i: int, j: int) -> str:
    return pair_name("c", i, j)


def topology_edge_order(g: LinkageGraph) -> tuple[Edge, ...]:
    """Vector convention for a graph: lexicographic, with (5,7) last when present."""
    edges = g.sorted_edges()
    if (5, 7) in g.edges:
        edges.remove((5, 7))
        edges.append((5, 7))
    return tuple(edges)


class DistanceAssignment(Mapping):
    """Positive bar lengths keyed by edge; squared values are kept exactly.

    >>> d = DistanceAssignment({(1, 2): 3, (1, 3): 4, (2, 3): 5})
    >>> d.squared((2, 1))
    Fraction(9, 1)
    """

    def __init__(self, lengths: Mapping[Edge, object] | None = None, *, squared: Mapping[Edge, object] | None = None):
        sq: dict[Edge, Fraction] = {}
        if lengths:
            for e, l in lengths.items():
                fl = Fraction(l)
                if fl <= 0:
                    raise ValueError(f"length of edge {e} must be positive, got {l}")
                sq[_key(e)] = fl * fl
        if squared:
            for e, c in squared.items():
                fc = Fraction(c)
                if fc <= 0:
                    raise ValueError(f"squared length of edge {e} must be positive, got {c}")
                sq[_key(e)] = fc
        self._sq = sq

    @classmethod
    def from_vector(cls, values: Sequence[object], order: Sequence[Edge] = V17_EDGE_ORDER) -> "DistanceAssignment":
        if len(values) != len(order):
            raise ValueError(f"expected {len(order)} lengths, got {len(values)}")
        return cls(dict(zip(order, values)))

    def __getitem__(self, e: Edge) -> float:
        return math.sqrt(self._sq[_key(e)])

    def __iter__(self):
        return iter(sorted(self._sq))

    def __len__(self) -> int:
        return len(self._sq)

    def squared(self, e: Edge) -> Fraction:
        return self._sq[_key(e)]

    def squared_values(self) -> dict[Edge, Fraction]:
        return dict(self._sq)

    def scaled(self, factor) -> "DistanceAssignment":
        f = Fraction(factor)
        return DistanceAssignment(squared={e: c * f * f for e, c in self._sq.items()})

    def relabel(self, perm: Mapping[int, int]) -> "DistanceAssignment":
        return DistanceAssignment(
            squared={_key((perm.get(a, a), perm.get(b, b))): c for (a, b), c in self._sq.items()}
        )

    def vector(self, order: Sequence[Edge] = V17_EDGE_ORDER) -> list[float]:
        return [self[e] for e in order]

    def covers(self, g: LinkageGraph) -> bool:
        return set(g.edges) <= set(self._sq)

    def to_json(self) -> str:
        return json.dumps({"edges": {f"{a}-{b}": self[(a, b)] for a, b in self}})

    def __repr__(self) -> str:
        return f"DistanceAssignment({ {e: self[e] for e in self} })"


def _key(e) -> Edge:
    a, b = e
    a, b = int(a), int(b)
    if a == b:
        raise ValueError("edge endpoints must differ")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class CayleyMengerMatrix:
    """Bordered distance matrix of a linkage graph.

    Row/column 0 is the border of ones. Entry (i, j), i != j >= 1, is the
    known squared length ``c_ij`` for edges and the unknown ``x_ij`` otherwise.
    """

    graph: LinkageGraph

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def knowns(self) -> list[Edge]:
        return self.graph.sorted_edges()

    @property
    def unknowns(self) -> list[Edge]:
        return self.graph.non_edges()

    def entry_name(self, i: int, j: int) -> str | None:
        """Symbol at (i, j); None for the constant border/diagonal entries."""
        if i == j or i == 0 or j == 0:
            return None
        if self.graph.has_edge(i, j):
            return known_name(i, j)
        return unknown_name(i, j)

    def symbolic(self) -> list[list[str | int]]:
        """The full (n+1) x (n+1) matrix with symbol names or integer constants."""
        size = self.n + 1
        rows = []
        for i in range(size):
            row = []
            for j in range(size):
                if i == j:
                    row.append(0)
                elif i == 0 or j == 0:
                    row.append(1)
                else:
                    row.append(self.entry_name(i, j))
            rows.append(row)
        return rows

    def numeric(self, squared: Mapping[Edge, object]) -> list[list[Fraction]]:
        """Matrix with every pair's squared distance filled in from ``squared``."""
        size = self.n + 1
        out = [[Fraction(0)] * size for _ in range(size)]
        for i in range(1, size):
            out[0][i] = out[i][0] = Fraction(1)
        for i, j in combinations(range(1, size), 2):
            out[i][j] = out[j][i] = Fraction(squared[(i, j)])
        return out


def cm_matrix(g: LinkageGraph) -> CayleyMengerMatrix:
    return CayleyMengerMatrix(g)


def minor_variables(m: CayleyMengerMatrix, verts: Sequence[int]) -> list[str]:
    return [unknown_name(i, j) for i, j in combinations(sorted(verts), 2) if not m.graph.has_edge(i, j)]


def minor_polynomial(
    m: CayleyMengerMatrix,
    verts: Sequence[int],
    lengths: DistanceAssignment | None = None,
) -> Polynomial:
    """Expand the diagonal minor D(0, i1, ..., ik).

    Without ``lengths`` the knowns stay symbolic (``c_ij`` variables, listed
    before the unknowns); with ``lengths`` they are substituted exactly and
    only the unknowns remain.
    """
    verts = sorted(set(verts))
    if not verts or verts[0] < 1 or verts[-1] > m.n:
        raise ValueError(f"vertices {verts} outside 1..{m.n}")
    unknowns = minor_variables(m, verts)
    knowns = [known_name(i, j) for i, j in combinations(verts, 2) if m.graph.has_edge(i, j)]
    if lengths is None:
        names = knowns + unknowns
        value_of = {}
    else:
        names = unknowns
        value_of = {known_name(*e): lengths.squared(e) for e in combinations(verts, 2) if m.graph.has_edge(*e)}
    idx = [0] + verts
    zero = Polynomial.constant(0, names)
    one = Polynomial.constant(1, names)
    rows = []
    for a in idx:
        row = []
        for b in idx:
            name = m.entry_name(a, b)
            if a == b:
                row.append(zero)
            elif name is None:
                row.append(one)
            elif name in value_of:
                row.append(Polynomial.constant(value_of[name], names))
            else:
                row.append(Polynomial.variable(name, names))
        rows.append(row)
    return determinant(rows)


def numeric_minor(squared: Mapping[Edge, object], verts: Sequence[int]) -> Fraction:
    """Exact D(0, verts) for fully specified squared distances."""
    idx = [0] + sorted(verts)
    mat = []
    for a in idx:
        row = []
        for b in idx:
            if a == b:
                row.append(0)
            elif a == 0 or b == 0:
                row.append(1)
            else:
                row.append(squared[_key((a, b))])
        mat.append(row)
    return fraction_determinant(mat)


@dataclass
class MinorSystem:
    """A square system of diagonal minors in a chosen set of unknown distances.

    ``polynomials`` keep the known squared lengths symbolic; use
    :meth:`substitute` to get the numeric system for a length assignment.
    """

    graph: LinkageGraph
    variables: list[Edge]
    minors: list[tuple[int, ...]]
    polynomials: list[Polynomial]
    topology: TopologyId | None = None
    mixed_volume: int | None = None
    placement_order: list[int] | None = None
    extra: dict = field(default_factory=dict)

    @property
    def variable_names(self) -> list[str]:
        return [unknown_name(*e) for e in self.variables]

    def supports(self) -> list[frozenset]:
        names = self.variable_names
        return [p.support(names) for p in self.polynomials]

    def substitute(self, lengths: DistanceAssignment) -> list[Polynomial]:
        names = self.variable_names
        out = []
        for p in self.polynomials:
            vals = {v: lengths.squared(_edge_of(v)) for v in p.variables if v.startswith("c")}
            out.append(p.substitute(vals).reorder(names))
        return out

    def total_degrees(self) -> list[int]:
        names = self.variable_names
        return [max(sum(e) for e in p.support(names)) for p in self.polynomials]

    def to_dict(self) -> dict:
        return {
            "topology": self.topology.value if self.topology else None,
            "n": self.graph.n,
            "edges": [list(e) for e in self.graph.sorted_edges()],
            "variables": self.variable_names,
            "minors": [list(s) for s in self.minors],
            "mixed_volume": self.mixed_volume,
            "polynomials": [p.to_dict() for p in self.polynomials],
        }


def _edge_of(name: str) -> Edge:
    body = name[1:]
    if "_" in body:
        a, b = body.split("_")
        return (int(a), int(b))
    return (int(body[0]), int(body[1:]))


#: Minor sets of the canonical V17 system, in their conventional order.
V17_CANONICAL_MINORS: tuple[tuple[int, ...], ...] = (
    (4, 5, 6, 7), (1, 4, 6, 7), (1, 4, 5, 7), (1, 2, 3, 5), (1, 3, 5, 6),
)
V17_CANONICAL_VARIABLES: tuple[Edge, ...] = ((1, 5), (1, 6), (3, 5), (4, 5), (6, 7))
#: Placement order used to rebuild coordinates from a V17 solution.
V17_PLACEMENT_ORDER = [1, 2, 3, 5, 6, 4, 7]


def build_minor_system(
    g: LinkageGraph,
    variables: Sequence[Edge],
    minors: Sequence[Sequence[int]],
    topology: TopologyId | None = None,
) -> MinorSystem:
    m = cm_matrix(g)
    vars_ = [_key(e) for e in variables]
    names = {unknown_name(*e) for e in vars_}
    polys = []
    for s in minors:
        p = minor_polynomial(m, s)
        stray = {v for v in p.involved() if v.startswith("x")} - names
        if stray:
            raise ValueError(f"minor {tuple(s)} involves unknowns {sorted(stray)} outside the chosen variables")
        polys.append(p)
    return MinorSystem(g, vars_, [tuple(sorted(s)) for s in minors], polys, topology=topology)


def canonical_system_v17() -> MinorSystem:
    g = builtin_topology(TopologyId.V17)
    system = build_minor_system(g, V17_CANONICAL_VARIABLES, V17_CANONICAL_MINORS, TopologyId.V17)
    system.placement_order = list(V17_PLACEMENT_ORDER)
    return system


def placement_order(n: int, edges: Iterable[Edge]) -> list[int] | None:
    """A sequential-trilateration order, or None if none exists.

    Starts from a triangle and repeatedly places a vertex with at least three
    determined distances to already placed vertices. Adding vertices only
    adds distances, so greedy placement from a given triangle is complete.
    """
    adj: dict[int, set[int]] = {v: set() for v in range(1, n + 1)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    for tri in combinations(range(1, n + 1), 3):
        a, b, c = tri
        if not (b in adj[a] and c in adj[a] and c in adj[b]):
            continue
        order = list(tri)
        placed = set(tri)
        progress = True
        while progress and len(order) < n:
            progress = False
            for v in range(1, n + 1):
                if v not in placed and len(adj[v] & placed) >= 3:
                    order.append(v)
                    placed.add(v)
                    progress = True
                    break
        if len(order) == n:
            return order
    return None


class _JacobianSampler:
    """Exact gradients of every candidate minor at a random planar realization.

    Squared distances come from random integer coordinates, so every minor
    vanishes at the sample point and a nonsingular Jacobian there shows the
    realization is an isolated solution of the system.
    """

    def __init__(self, g: LinkageGraph, minors: dict[tuple[int, ...], Polynomial], rng: random.Random):
        pts = {v: (rng.randint(-1000, 1000), rng.randint(-1000, 1000)) for v in g.vertices}

        def sq(i, j):
            return Fraction((pts[i][0] - pts[j][0]) ** 2 + (pts[i][1] - pts[j][1]) ** 2)

        values = {}
        for e in g.sorted_edges():
            values[known_name(*e)] = sq(*e)
        for e in g.non_edges():
            values[unknown_name(*e)] = sq(*e)
        self.values = values
        self.minors = minors
        self._grad: dict[tuple[tuple[int, ...], str], Fraction] = {}

    def partial(self, minor: tuple[int, ...], var: str) -> Fraction:
        key = (minor, var)
        if key not in self._grad:
            p = self.minors[minor]
            if var in p.variables:
                self._grad[key] = p.derivative(var).evaluate(self.values)
            else:
                self._grad[key] = Fraction(0)
        return self._grad[key]

    def nonsingular(self, minors: Sequence[tuple[int, ...]], names: Sequence[str]) -> bool:
        jac = [[self.partial(s, v) for v in names] for s in minors]
        return fraction_determinant(jac) != 0


def jacobian_certificate(system: MinorSystem, seed: int = 0, attempts: int = 3) -> bool:
    """Probabilistic finiteness check: Jacobian nonsingular at a random realization."""
    rng = random.Random(seed)
    table = dict(zip(system.minors, system.polynomials))
    for _ in range(attempts):
        if _JacobianSampler(system.graph, table, rng).nonsingular(system.minors, system.variable_names):
            return True
    return False


def candidate_minor_systems(g: LinkageGraph, k: int = 5, seed: int = 0):
    """Yield every certified (variables, minors) pair of size k for ``g``.

    A candidate uses only minors whose unknowns lie in the variable set, the
    minors jointly cover every variable, the exact Jacobian is nonsingular at
    a random planar realization (up to three samples), and knowns plus variables
    admit a sequential-trilateration order.
    """
    m = cm_matrix(g)
    rng = random.Random(seed)
    minors = {}
    unknowns_of = {}
    for s in combinations(g.vertices, 4):
        unk = frozenset(_key(e) for e in combinations(s, 2) if not g.has_edge(*e))
        if not unk:
            continue
        minors[s] = minor_polynomial(m, s)
        unknowns_of[s] = unk
    samplers = [_JacobianSampler(g, minors, rng) for _ in range(3)]
    for vset in combinations(g.non_edges(), k):
        vs = frozenset(vset)
        order = placement_order(g.n, list(g.edges) + list(vset))
        if order is None:
            continue
        usable = [s for s in minors if unknowns_of[s] <= vs]
        names = [unknown_name(*e) for e in vset]
        for chosen in combinations(usable, k):
            covered = frozenset().union(*(unknowns_of[s] for s in chosen))
            if covered != vs:
                continue
            if not any(sm.nonsingular(chosen, names) for sm in samplers):
                continue
            system = MinorSystem(g, list(vset), list(chosen), [minors[s] for s in chosen])
            system.placement_order = order
            yield system


def select_minor_system(g: LinkageGraph, k: int = 5, seed: int = 0, topology: TopologyId | None = None) -> list[MinorSystem]:
    """All certified minor systems for ``g``, sorted by mixed volume (ascending)."""
    from .mixed_volume import MixedVolumeCache

    cache = MixedVolumeCache()
    found = []
    for system in candidate_minor_systems(g, k, seed):
        system.topology = topology
        system.mixed_volume = cache.mixed_volume(system.supports())
        found.append(system)
    if not found:
        raise ValueError(f"no certified {k}x{k} minor system for this graph")
    found.sort(key=lambda s: (s.mixed_volume, s.variables, s.minors))
    return found


def coordinate_system(g: LinkageGraph, lengths: DistanceAssignment) -> tuple[list[Polynomial], list[str]]:
    """Edge-length equations in vertex coordinates.

    Vertex 1 sits at the origin and vertex 2 at (l_12, 0); the remaining
    2n-4 coordinates are unknown. Returns ``(equations, variable names)``.
    When ``l_12`` is irrational its float value is used as an exact rational.
    """
    if not g.has_edge(1, 2):
        raise ValueError("coordinate system pins edge (1,2); relabel so that it exists")
    if not lengths.covers(g):
        raise ValueError("lengths must cover every edge")
    names = []
    for v in range(3, g.n + 1):
        names += [f"px{v}", f"py{v}"]
    c12 = lengths.squared((1, 2))
    root = _exact_sqrt(c12)
    l12 = root if root is not None else Fraction(math.sqrt(c12))
    pinned = {1: (Fraction(0), Fraction(0)), 2: (l12, Fraction(0))}

    def coord(v: int) -> tuple[Polynomial, Polynomial]:
        if v in pinned:
            x, y = pinned[v]
            return Polynomial.constant(x, names), Polynomial.constant(y, names)
        return Polynomial.variable(f"px{v}", names), Polynomial.variable(f"py{v}", names)

    eqs = []
    for a, b in g.sorted_edges():
        if (a, b) == (1, 2):
            continue
        xa, ya = coord(a)
        xb, yb = coord(b)
        eqs.append((xa - xb) ** 2 + (ya - yb) ** 2 - lengths.squared((a, b)))
    return eqs, names


def _exact_sqrt(q: Fraction) -> Fraction | None:
    n, d = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if n * n == q.numerator and d * d == q.denominator:
        return Fraction(n, d)
    return None
