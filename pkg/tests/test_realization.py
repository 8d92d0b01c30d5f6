import json
import math
import xml.etree.ElementTree as ET
from itertools import combinations

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from assembly_modes.assembly import assembly_count, embeddable_solutions
from assembly_modes.distance import V17_CANONICAL_VARIABLES, V17_EDGE_ORDER, DistanceAssignment
from assembly_modes.realization import (
    Embedding,
    Infeasible,
    cayley_menger_numeric,
    embeddings_json,
    export_svg,
    reconstruct_embedding,
    verify_cayley_menger,
)

SVG = "{http://www.w3.org/2000/svg}"

coord = st.integers(-500, 500)
point_sets = st.lists(st.tuples(coord, coord), min_size=7, max_size=7, unique=True)


def sq(p, q):
    return float((p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2)


def well_spread(pts, frac=1e-3):
    """Reject near-collinear triples so trilateration is well conditioned."""
    pts = np.asarray(pts, dtype=float)
    span = max(sq(p, q) for p, q in combinations(pts, 2))
    for a, b, c in combinations(pts, 3):
        area = abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])) / 2
        if area < frac * span:
            return False
    return True


def measure(pts):
    lengths = DistanceAssignment(squared={e: sq(pts[e[0] - 1], pts[e[1] - 1]) for e in V17_EDGE_ORDER})
    solution = [sq(pts[i - 1], pts[j - 1]) for i, j in V17_CANONICAL_VARIABLES]
    return lengths, solution


def test_equilateral_triangle():
    lengths = DistanceAssignment({(1, 2): 1, (1, 3): 1, (2, 3): 1})
    emb = reconstruct_embedding(lengths, {}, order=[1, 2, 3], variables=())
    assert np.allclose(emb.coords, [[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]], atol=1e-15)
    assert emb.orientation == 1


@given(point_sets)
def test_reconstruct_then_measure_is_identity(pts):
    assume(well_spread(pts))
    lengths, solution = measure(pts)
    emb = reconstruct_embedding(lengths, solution)
    # every pairwise distance agrees: the placement is congruent to the input
    for (i, j), d2 in emb.pairwise_squared().items():
        assert d2 == pytest.approx(sq(pts[i - 1], pts[j - 1]), rel=1e-8)
    for (i, j), x in zip(V17_CANONICAL_VARIABLES, solution):
        assert emb.distance(i, j) ** 2 == pytest.approx(x, rel=1e-8)
    assert emb.max_residual < 1e-8
    assert emb.orientation in (1, -1)


def test_inconsistent_final_distance_is_infeasible():
    pts = [(0, 0), (300, 0), (120, 260), (-80, 310), (200, 180), (350, 240), (40, -150)]
    lengths, solution = measure(pts)
    reconstruct_embedding(lengths, solution)
    solution[-1] *= 1.1  # x67
    with pytest.raises(Infeasible):
        reconstruct_embedding(lengths, solution)


def test_non_positive_solution_is_infeasible():
    lengths, solution = measure([(0, 0), (300, 0), (120, 260), (-80, 310), (200, 180), (350, 240), (40, -150)])
    solution[0] = -1.0
    with pytest.raises(Infeasible):
        reconstruct_embedding(lengths, solution)


@given(point_sets)
def test_mirror_preserves_all_distances(pts):
    emb = Embedding(np.asarray(pts, dtype=float), 1, 0.0, list(V17_EDGE_ORDER))
    m = emb.mirrored()
    assert m.orientation == -1
    assert m.pairwise_squared() == emb.pairwise_squared()
    assert len(m.pairwise_squared()) == 21


# -- Cayley-Menger conditions ---------------------------------------------------


def test_right_triangle_minor():
    rep = verify_cayley_menger([(0, 0), (1, 0), (0, 1)])
    assert rep.triangle_123 == pytest.approx(-16 * 0.5**2)
    assert rep.rank == 4 and rep.sign_conditions and rep.embeddable


def test_collinear_minor_vanishes():
    rep = verify_cayley_menger([(0, 0), (1, 0), (2, 0)])
    assert rep.triangle_123 == pytest.approx(0.0, abs=1e-12)
    assert rep.rank == 3


@given(st.lists(st.tuples(coord, coord), min_size=7, max_size=7))
def test_planar_points_satisfy_rank_condition(pts):
    rep = verify_cayley_menger(pts)
    assert rep.vanishing and rep.sign_conditions
    assert rep.max_scaled_planar_minor < 1e-9
    assert rep.rank <= 4


def test_non_planar_distances_are_rejected():
    # four mutually equidistant points exist only in space
    B = np.ones((5, 5)) - np.eye(5)
    tetra = [(0, 0, 0), (1, 0, 0), (0.5, math.sqrt(3) / 2, 0), (0.5, math.sqrt(3) / 6, math.sqrt(2 / 3))]
    assert np.allclose(cayley_menger_numeric(tetra), B)
    rep = verify_cayley_menger(tetra)
    assert not rep.vanishing and rep.rank == 5


def test_embeddable_solutions_pass_cayley_menger():
    rng = np.random.default_rng(3)
    v = [int(x) for x in np.round(rng.uniform(60, 240, 11))]
    lengths = DistanceAssignment.from_vector(v)
    count = assembly_count("V17", lengths)
    real = embeddable_solutions("V17", lengths, count)
    assert len(real.embeddings) + real.infeasible + real.nongeneric == count.N
    assert real.embeddings
    for emb in real.embeddings:
        assert verify_cayley_menger(emb.coords).embeddable
        for e in V17_EDGE_ORDER:
            assert emb.distance(*e) == pytest.approx(lengths[e], rel=1e-8)


# -- rendering -------------------------------------------------------------------


def random_embeddings(k, seed=0):
    rng = np.random.default_rng(seed)
    return [Embedding(rng.normal(size=(7, 2)), 1, 0.0, list(V17_EDGE_ORDER)) for _ in range(k)]


def cells(svg):
    root = ET.fromstring(svg.encode())
    return [g for g in root.iter(f"{SVG}g") if g.get("id", "").startswith("mode-")]


@pytest.mark.parametrize("mirror,expected", [(False, 28), (True, 56)])
def test_grid_cell_count(mirror, expected):
    svg = export_svg(random_embeddings(28), mirror=mirror)
    groups = cells(svg)
    assert len(groups) == expected
    for g in groups:
        assert len(g.findall(f"{SVG}line")) == 11
        assert [t.text for t in g.findall(f"{SVG}text")] == [str(v) for v in range(1, 8)]


def test_single_triangle_cell():
    tri = Embedding(np.array([[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]]), 1, 0.0, [(1, 2), (1, 3), (2, 3)])
    (g,) = cells(export_svg([tri]))
    assert [t.text for t in g.findall(f"{SVG}text")] == ["1", "2", "3"]
    assert len(g.findall(f"{SVG}circle")) == 3


def test_svg_is_deterministic():
    a = export_svg(random_embeddings(5, seed=9), mirror=True, title="modes")
    b = export_svg(random_embeddings(5, seed=9), mirror=True, title="modes")
    assert a == b
    assert export_svg(random_embeddings(5, seed=9)) != a


def test_svg_requires_input():
    with pytest.raises(ValueError):
        export_svg([])


def test_embeddings_json_roundtrip():
    embs = random_embeddings(2)
    data = json.loads(embeddings_json(embs))
    assert np.allclose(data[1]["coords"], embs[1].coords)
    assert data[0]["edges"][0] == [1, 2]
