"""
Why 56: bounding the assembly modes of an 11-bar linkage
========================================================

Build the distance-based polynomial system for the V17 topology, compare its
Bezout number with its mixed volume, and solve one instance with generic
complex coefficients to see the mixed volume attained.
"""

import numpy as np

from assembly_modes.distance import canonical_system_v17
from assembly_modes.graph import TopologyId, builtin_topology, closed_form_bounds
from assembly_modes.homotopy import solve_system
from assembly_modes.mixed_volume import bezout_bound, system_mixed_volume

# the linkage: 7 joints, 11 bars, Laman rigid
g = builtin_topology(TopologyId.V17)
print("edges:", sorted(g.edges))

# five diagonal minors of the Cayley-Menger matrix in five unknown distances
system = canonical_system_v17()
names = system.variable_names
print("unknowns:", names)
print("degrees:", system.total_degrees())

# Bezout counts every root in projective space; the mixed volume only the toric ones
print("bezout:", bezout_bound(system.polynomials, names))
print("mixed volume:", system_mixed_volume(system.polynomials, names))

# random complex coefficients on the same supports reach the mixed volume
rng = np.random.default_rng(0)
generic = [[(e, complex(*rng.normal(size=2))) for e in sorted(sp)] for sp in system.supports()]
sols = solve_system(generic, seed=0)
print(f"generic instance: {sols.tracked} paths, {sols.finite} finite, {sols.diverged} at infinity")

# how the bound grows with the number of joints
for n in (7, 11, 15):
    b = closed_form_bounds(n)
    print(f"n={n}: fan lower bound {b.fan_lower}, Bezout {b.bezout}")
