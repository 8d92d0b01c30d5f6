"""Assembly-mode counts: the objective N, embeddable solutions and the coordinate oracle."""
from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .distance import (
    DistanceAssignment,
    MinorSystem,
    canonical_system_v17,
    coordinate_system,
    select_minor_system,
)
from .graph import TopologyId, builtin_topology
from .homotopy import SolutionSet, TrackerConfig, classify_solutions, solve_system
from .realization import Embedding, Infeasible, NonGeneric, reconstruct_embedding


@functools.lru_cache(maxsize=None)
def topology_system(topology: TopologyId | str) -> MinorSystem:
    """The minor system used to count modes: the canonical one for V17,
    the smallest-mixed-volume certified system otherwise."""
    tid = TopologyId.parse(topology)
    if tid is TopologyId.V17:
        return canonical_system_v17()
    return select_minor_system(builtin_topology(tid), topology=tid)[0]


def normalized(lengths: DistanceAssignment) -> DistanceAssignment:
    """Rescale so the largest squared length is one (counts are scale invariant)."""
    top = max(lengths.squared(e) for e in lengths)
    return DistanceAssignment(squared={e: lengths.squared(e) / top for e in lengths})


@dataclass
class AssemblyCount:
    """Outcome of one evaluation of the objective."""

    N: int
    solutions: SolutionSet | None
    attempts: int
    degenerate: bool
    real: int = 0
    real_positive: int = 0
    borderline: int = 0
    notes: list[str] = field(default_factory=list)

    def positive_solutions(self) -> list[np.ndarray]:
        if self.solutions is None:
            return []
        tol = self.solutions.config.real_tol
        return [s.point.real for s in self.solutions.solutions if s.is_real_positive(tol)]


def assembly_count(
    topology: TopologyId | str,
    lengths: DistanceAssignment,
    cfg: TrackerConfig | None = None,
    seed: int = 0,
    retries: int = 1,
) -> AssemblyCount:
    """Solve the minor system for ``lengths`` and count real positive solutions.

    A run with lost paths or merged endpoints is repeated with a fresh gamma
    up to ``retries`` times; if it stays suspicious the count is 0.
    """
    system = topology_system(topology)
    if not lengths.covers(system.graph):
        raise ValueError("lengths must cover every bar of the topology")
    polys = system.substitute(normalized(lengths))
    cfg = cfg or TrackerConfig()
    notes = []
    sols = None
    for attempt in range(retries + 1):
        sols = solve_system(polys, cfg, seed=seed + 7919 * attempt, variables=system.variable_names)
        if sols.failed == 0 and sols.duplicates == 0:
            counts = classify_solutions(sols, cfg.real_tol)
            return AssemblyCount(
                counts["real_positive"], sols, attempt + 1, False,
                counts["real"], counts["real_positive"], counts["borderline"], notes,
            )
        notes.append(f"attempt {attempt + 1}: {sols.failed} failed paths, {sols.duplicates} duplicates")
    return AssemblyCount(0, sols, retries + 1, True, notes=notes)


def count_assembly_N(
    topology: TopologyId | str,
    lengths: DistanceAssignment,
    cfg: TrackerConfig | None = None,
    seed: int = 0,
) -> int:
    """Number of real positive solutions of the minor system (0 when degenerate)."""
    return assembly_count(topology, lengths, cfg, seed).N


@dataclass
class Realizations:
    embeddings: list[Embedding]
    infeasible: int
    nongeneric: int


def embeddable_solutions(topology: TopologyId | str, lengths: DistanceAssignment, count: AssemblyCount) -> Realizations:
    """Reconstruct every real positive solution; solutions are in normalised units."""
    system = topology_system(topology)
    norm = normalized(lengths)
    top = max(lengths.squared(e) for e in lengths)
    factor = float(top) ** 0.5
    out, bad, odd = [], 0, 0
    for point in count.positive_solutions():
        try:
            emb = reconstruct_embedding(norm, point, order=system.placement_order, variables=system.variables)
        except Infeasible:
            bad += 1
            continue
        except NonGeneric:
            odd += 1
            continue
        emb.coords = emb.coords * factor
        out.append(emb)
    out.sort(key=lambda e: tuple(np.round(e.coords.ravel(), 9)))
    return Realizations(out, bad, odd)


@dataclass
class OracleCount:
    complex: int
    real: int
    congruence_classes: int
    degenerate: bool
    solutions: SolutionSet


def oracle_coordinate_count(
    topology: TopologyId | str,
    lengths: DistanceAssignment,
    cfg: TrackerConfig | None = None,
    seed: int = 0,
    graph=None,
) -> OracleCount:
    """Count planar embeddings from the vertex-coordinate formulation.

    Real solutions pair up under y -> -y, so classes = real / 2; an odd real
    count is flagged as degenerate (some configuration is collinear).
    """
    g = graph if graph is not None else builtin_topology(topology)
    eqs, names = coordinate_system(g, normalized(lengths))
    sols = solve_system(eqs, cfg or TrackerConfig(), seed=seed, variables=names)
    counts = classify_solutions(sols, sols.config.real_tol)
    real = counts["real"]
    return OracleCount(sols.finite, real, real // 2, bool(real % 2), sols)
