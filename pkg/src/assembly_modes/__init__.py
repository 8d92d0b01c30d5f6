"""Assembly modes of rigid planar linkages.

Graphs and Henneberg steps, Cayley-Menger minor systems, exact mixed
volumes, a total-degree homotopy solver, planar reconstruction, and
stochastic searches for bar lengths with many assembly modes.
"""
from .assembly import (
    AssemblyCount,
    assembly_count,
    count_assembly_N,
    embeddable_solutions,
    oracle_coordinate_count,
    topology_system,
)
from .distance import (
    V17_EDGE_ORDER,
    CayleyMengerMatrix,
    DistanceAssignment,
    MinorSystem,
    canonical_system_v17,
    cm_matrix,
    coordinate_system,
    minor_polynomial,
    select_minor_system,
)
from .graph import (
    DESARGUES,
    HennebergStep,
    LinkageGraph,
    TopologyId,
    apply_henneberg,
    builtin_topology,
    closed_form_bounds,
    is_laman,
    pebble_game_is_laman,
)
from .homotopy import SolutionSet, TrackerConfig, classify_solutions, solve_system
from .mixed_volume import bezout_bound, mixed_volume, newton_polytope, system_mixed_volume
from .optimizer import (
    OptimizerConfig,
    OptimizerRun,
    cross_entropy,
    gaussian_neighbour,
    random_search,
    simulated_annealing,
)
from .polynomial import Polynomial
from .polytope import polytope_volume
from .realization import Embedding, Infeasible, export_svg, reconstruct_embedding, verify_cayley_menger

PUBLISHED_LENGTHS = (180, 70, 200, 205, 210, 205, 80, 200, 70, 200, 100)
"""Published 11-bar vector l_0..l_10, read under :data:`V17_EDGE_ORDER`."""

__version__ = "0.1.0"
