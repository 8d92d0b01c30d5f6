import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from assembly_modes.assembly import (
    assembly_count,
    count_assembly_N,
    embeddable_solutions,
    normalized,
    oracle_coordinate_count,
    topology_system,
)
from assembly_modes.distance import V17_EDGE_ORDER, DistanceAssignment, canonical_system_v17
from assembly_modes.graph import V17_AUTOMORPHISM, LinkageGraph
from assembly_modes.homotopy import TrackerConfig, classify_solutions, solve_system
from assembly_modes.polynomial import Polynomial

X = Polynomial.variable("x", ["x", "y"])
Y = Polynomial.variable("y", ["x", "y"])


def sorted_real(sols):
    return sorted(tuple(np.round(s.point.real, 9)) for s in sols.solutions)


def generic_vector(rng):
    return [int(v) for v in np.round(rng.uniform(60, 240, 11))]


def permuted(lengths: DistanceAssignment, perm: dict) -> DistanceAssignment:
    sig = lambda v: perm.get(v, v)
    return DistanceAssignment(
        squared={tuple(sorted((sig(i), sig(j)))): lengths.squared((i, j)) for i, j in lengths}
    )


# -- small systems with known roots ---------------------------------------


def test_factorable_system():
    s = solve_system([X * X - 3 * X + 2, Y - X], seed=0)
    assert s.tracked == 2
    assert sorted_real(s) == [(1.0, 1.0), (2.0, 2.0)]
    assert s.counts() == {"real": 2, "real_positive": 2, "borderline": 0}


def test_circle_intersection():
    s = solve_system([X * X + Y * Y - 1, (X - 1) ** 2 + Y * Y - 1], seed=1)
    h = math.sqrt(3) / 2
    assert sorted_real(s) == [(0.5, round(-h, 9)), (0.5, round(h, 9))]
    c = s.counts()
    assert (c["real"], c["real_positive"]) == (2, 1)
    # two of the four Bezout paths go to the circular points at infinity
    assert s.tracked == 4 and s.diverged == 2 and s.failed == 0


def test_non_square_system_rejected():
    with pytest.raises(ValueError):
        solve_system([X * X - 1], variables=["x", "y"])


@pytest.mark.parametrize(
    "kwargs",
    [dict(min_step=0.1, initial_step=0.05), dict(initial_step=0.2), dict(corrector_tol=0.0), dict(real_tol=-1.0)],
)
def test_tracker_config_validation(kwargs):
    with pytest.raises(ValueError):
        TrackerConfig(**kwargs)


def test_sympy_oracle_on_random_dense_pair():
    # independent oracle: sympy's exact solver for a random integer system
    rng = np.random.default_rng(11)
    c = [int(v) for v in rng.integers(-9, 10, 12)]
    f = c[0] * X * X + c[1] * X * Y + c[2] * Y * Y + c[3] * X + c[4] * Y + c[5]
    g = c[6] * X * X + c[7] * X * Y + c[8] * Y * Y + c[9] * X + c[10] * Y + c[11]
    sx, sy = sympy.symbols("x y")
    fs = c[0] * sx**2 + c[1] * sx * sy + c[2] * sy**2 + c[3] * sx + c[4] * sy + c[5]
    gs = c[6] * sx**2 + c[7] * sx * sy + c[8] * sy**2 + c[9] * sx + c[10] * sy + c[11]
    exact = [(complex(a), complex(b)) for a, b in sympy.solve_poly_system([fs, gs], sx, sy)]
    sols = solve_system([f, g], seed=3)
    assert sols.finite == len(exact) == 4
    for p in exact:
        assert min(np.linalg.norm(s.point - np.array(p)) for s in sols.solutions) < 1e-8


@settings(max_examples=20)
@given(
    st.lists(st.integers(-6, 6), min_size=3, max_size=3, unique=True),
    st.integers(-4, 4).filter(lambda v: v != 0),
    st.integers(-4, 4),
)
def test_product_of_linear_factors(roots, slope, shift):
    """x has three prescribed roots and y is linear in x, so the roots are exact."""
    f = (X - roots[0]) * (X - roots[1]) * (X - roots[2])
    g = Y - slope * X - shift
    s = solve_system([f, g], seed=sum(roots) % 97)
    expect = sorted((float(r), float(slope * r + shift)) for r in roots)
    assert sorted_real(s) == [tuple(round(v, 9) for v in p) for p in expect]


# -- classification ---------------------------------------------------------


def test_classify_examples():
    pts = [np.array([1 + 0j, 2 + 0j]), np.array([0.5, -math.sqrt(3) / 2], dtype=complex), np.array([1 + 0.5j, 1])]
    assert classify_solutions(pts[:1]) == {"real": 1, "real_positive": 1, "borderline": 0}
    assert classify_solutions(pts[1:2]) == {"real": 1, "real_positive": 0, "borderline": 0}
    assert classify_solutions(pts[2:]) == {"real": 0, "real_positive": 0, "borderline": 0}


def test_classify_flags_borderline():
    c = classify_solutions([np.array([1 + 5e-8j, 2])], tol=1e-8)
    assert c == {"real": 0, "real_positive": 0, "borderline": 1}
    c = classify_solutions([np.array([5e-8, 2], dtype=complex)], tol=1e-8)
    assert c == {"real": 1, "real_positive": 1, "borderline": 1}


# -- canonical minor system --------------------------------------------------


def random_coefficient_system(seed):
    r = np.random.default_rng(seed)
    return [[(e, complex(*r.normal(size=2))) for e in sorted(sp)] for sp in canonical_system_v17().supports()]


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_random_coefficients_reach_mixed_volume(seed):
    s = solve_system(random_coefficient_system(seed), seed=seed)
    assert s.tracked == 72
    assert (s.finite, s.failed, s.duplicates) == (56, 0, 0)
    # all finite roots lie in the torus
    assert all(np.all(np.abs(x.point) > 1e-6) for x in s.solutions)


def test_solutions_satisfy_minors_and_are_separated():
    lengths = DistanceAssignment.from_vector(generic_vector(np.random.default_rng(7)))
    count = assembly_count("V17", lengths)
    system = topology_system("V17")
    polys = system.substitute(normalized(lengths))
    cfg = count.solutions.config
    for sol in count.solutions.solutions:
        vals = dict(zip(system.variable_names, sol.point))
        for p in polys:
            scale = float(p.max_abs_coefficient())
            assert abs(p.evaluate(vals)) / scale < 1e-8
    pts = [s.point for s in count.solutions.solutions]
    for i in range(len(pts)):
        for j in range(i):
            assert np.linalg.norm(pts[i] - pts[j]) >= cfg.dedup_radius * (1 + np.linalg.norm(pts[i]))


def test_solution_count_stable_under_reseeding():
    lengths = DistanceAssignment.from_vector(generic_vector(np.random.default_rng(8)))
    runs = [assembly_count("V17", lengths, seed=s) for s in (0, 1, 2)]
    assert not any(r.degenerate for r in runs)
    assert len({r.solutions.finite for r in runs}) == 1
    assert len({r.N for r in runs}) == 1


def test_count_bounded_by_mixed_volume_and_even():
    rng = np.random.default_rng(21)
    for _ in range(6):
        c = assembly_count("V17", DistanceAssignment.from_vector(generic_vector(rng)))
        assert 0 <= c.N <= 56
        if not c.degenerate:
            assert c.N % 2 == 0
            assert c.solutions.finite <= 56


@pytest.mark.parametrize("scale", [2, 10])
def test_count_is_scale_invariant(scale):
    v = generic_vector(np.random.default_rng(30 + scale))
    base = count_assembly_N("V17", DistanceAssignment.from_vector(v))
    assert count_assembly_N("V17", DistanceAssignment.from_vector([scale * x for x in v])) == base


def test_count_invariant_under_graph_automorphism():
    # the relabelling must map bars to bars
    edges = set(V17_EDGE_ORDER)
    assert {tuple(sorted((V17_AUTOMORPHISM.get(i, i), V17_AUTOMORPHISM.get(j, j)))) for i, j in edges} == edges
    rng = np.random.default_rng(40)
    for _ in range(3):
        lengths = DistanceAssignment.from_vector(generic_vector(rng))
        assert count_assembly_N("V17", permuted(lengths, V17_AUTOMORPHISM)) == count_assembly_N("V17", lengths)


def test_unit_perturbations_change_count_by_at_most_two():
    """Statistical: most unit changes of one length move N by 0 or 2."""
    rng = np.random.default_rng(50)
    v = generic_vector(rng)
    base = count_assembly_N("V17", DistanceAssignment.from_vector(v))
    steps = []
    for k in range(10):
        w = list(v)
        w[k] += int(rng.choice([-1, 1]))
        steps.append(abs(count_assembly_N("V17", DistanceAssignment.from_vector(w)) - base))
    assert sum(d in (0, 2) for d in steps) >= 8


def test_lengths_must_cover_topology():
    short = DistanceAssignment({(1, 2): 1, (1, 3): 1})
    with pytest.raises(ValueError):
        assembly_count("V17", short)


def test_normalized_keeps_ratios():
    lengths = DistanceAssignment.from_vector(list(range(10, 120, 10)))
    n = normalized(lengths)
    assert max(n.squared(e) for e in n) == 1
    assert n.squared((1, 2)) / n.squared((1, 3)) == Fraction(100, 400)


# -- coordinate oracle --------------------------------------------------------


def test_oracle_triangle_is_one_mirror_pair():
    tri = LinkageGraph(3, [(1, 2), (1, 3), (2, 3)])
    o = oracle_coordinate_count("triangle", DistanceAssignment({(1, 2): 1, (1, 3): 1, (2, 3): 1}), graph=tri)
    assert (o.real, o.congruence_classes, o.degenerate) == (2, 1, False)


@pytest.mark.slow
def test_oracle_classes_match_embeddable_solutions():
    rng = np.random.default_rng(60)
    checked = 0
    while checked < 5:
        lengths = DistanceAssignment.from_vector(generic_vector(rng))
        count = assembly_count("V17", lengths)
        if count.degenerate:
            continue
        oracle = oracle_coordinate_count("V17", lengths)
        assert oracle.real % 2 == 0 and not oracle.degenerate
        assert oracle.congruence_classes == len(embeddable_solutions("V17", lengths, count).embeddings)
        checked += 1
