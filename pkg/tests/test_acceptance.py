"""End-to-end acceptance checks.

Each test prints one ``criterion k: PASS`` or ``criterion k: FAIL`` line to the
terminal (uncaptured) with a short summary of what was measured. Run with::

    pytest tests/test_acceptance.py -v

The stochastic search comparison is marked ``slow`` (about an hour on one core).
"""

import contextlib
import json
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from assembly_modes.assembly import (
    assembly_count,
    embeddable_solutions,
    oracle_coordinate_count,
)
from assembly_modes.cli import run_command
from assembly_modes.distance import (
    V17_EDGE_ORDER,
    DistanceAssignment,
    canonical_system_v17,
    cm_matrix,
    minor_polynomial,
    select_minor_system,
)
from assembly_modes.graph import FAN_GROWTH_CONSTANT, LinkageGraph, TopologyId, builtin_topology
from assembly_modes.homotopy import solve_system
from assembly_modes.mixed_volume import bezout_bound, system_mixed_volume
from assembly_modes.optimizer import OptimizerConfig, run_optimizer
from assembly_modes.realization import export_svg, verify_cayley_menger

# A 56-mode linkage (free bars l0..l9, bar 5-7 fixed at 100) found offline by
# refining the best cross-entropy point with Nelder-Mead and rounding. Used when
# the search test did not find one in this session.
KNOWN_56 = (86, 129, 111, 134, 98, 126, 104, 119, 106, 123)

_found: dict = {}


@pytest.fixture
def verdict(capsys):
    @contextlib.contextmanager
    def report(k: int):
        info: list[str] = []
        start = time.perf_counter()
        try:
            yield info
        except BaseException:
            status = "FAIL"
            raise
        else:
            status = "PASS"
        finally:
            with capsys.disabled():
                detail = "; ".join(info)
                print(f"\ncriterion {k}: {status} ({time.perf_counter() - start:.1f}s) {detail}")

    return report


def test_criterion_1_mixed_volume(verdict):
    with verdict(1) as info:
        system = canonical_system_v17()
        mv = system_mixed_volume(system.polynomials, system.variable_names)
        info.append(f"mixed volume {mv}")
        assert isinstance(mv, int) and mv == 56


def test_criterion_2_bezout(verdict):
    with verdict(2) as info:
        system = canonical_system_v17()
        degrees = system.total_degrees()
        b = bezout_bound(system.polynomials, system.variable_names)
        info.append(f"degrees {sorted(degrees)}, bezout {b}")
        assert sorted(degrees) == [2, 2, 2, 3, 3]
        assert b == 72 > system_mixed_volume(system.polynomials, system.variable_names)


def test_criterion_3_variant_minima(verdict):
    expected = {TopologyId.V37: 44, TopologyId.V67: 48}
    with verdict(3) as info:
        got = {}
        for tid, want in expected.items():
            systems = select_minor_system(builtin_topology(tid), topology=tid)
            hist: dict[int, int] = {}
            for s in systems:
                hist[s.mixed_volume] = hist.get(s.mixed_volume, 0) + 1
            got[tid] = systems[0].mixed_volume
            info.append(f"{tid.value}: min {got[tid]} (want {want}), histogram {dict(sorted(hist.items()))}")
        assert all(got[t] == w for t, w in expected.items())


def random_coefficient_system(seed):
    r = np.random.default_rng(seed)
    return [[(e, complex(*r.normal(size=2))) for e in sorted(sp)] for sp in canonical_system_v17().supports()]


def test_criterion_4_generic_coefficients(verdict):
    with verdict(4) as info:
        for seed in range(3):
            t = time.perf_counter()
            s = solve_system(random_coefficient_system(seed), seed=seed)
            dt = time.perf_counter() - t
            info.append(f"seed {seed}: {s.finite}/{s.tracked} finite in {dt:.2f}s")
            assert s.tracked == 72 and s.finite == 56 and s.failed == 0
            assert all(np.all(np.abs(x.point) > 1e-6) for x in s.solutions)
            assert dt < 1.0


@pytest.mark.slow
def test_criterion_5_search_comparison(verdict):
    with verdict(5) as info:
        results = {}
        for method in ("ce", "sa", "random"):
            runs = [run_optimizer(OptimizerConfig(method=method, seed=s)) for s in range(10)]
            results[method] = runs
            info.append(f"{method}: " + " ".join(r.display() for r in runs))
        best = max((r for runs in results.values() for r in runs), key=lambda r: r.best_value)
        if best.best_value == 56:
            _found["candidate"] = best.best_candidate
        sa = [r.best_value for r in results["sa"]]
        rnd = [r.best_value for r in results["random"]]
        info.append(f"sa runs >= 52: {sum(v >= 52 for v in sa)}/10, random median {np.median(rnd):.0f}")
        # the statistical gate: at least one cross-entropy run reaches 56
        assert any(r.best_value == 56 for r in results["ce"])


def best_linkage() -> DistanceAssignment:
    free = _found.get("candidate", KNOWN_56)
    if free is None:
        pytest.fail("no 56-mode linkage available")
    return DistanceAssignment.from_vector(list(free) + [100])


def test_criterion_6_best_linkage(verdict, tmp_path):
    with verdict(6) as info:
        lengths = best_linkage()
        counts = [assembly_count("V17", lengths, seed=s) for s in range(3)]
        info.append("N by seed " + ", ".join(str(c.N) for c in counts))
        assert [c.N for c in counts] == [56] * 3
        count = counts[0]
        worst = max(s.residual for s in count.solutions.solutions)
        info.append(f"max residual {worst:.1e}")
        assert len(count.solutions.solutions) == 56 and worst < 1e-8
        real = embeddable_solutions("V17", lengths, count)
        err = max(abs(emb.distance(*e) / lengths[e] - 1) for emb in real.embeddings for e in V17_EDGE_ORDER)
        info.append(f"{len(real.embeddings)} embeddable, max bar error {err:.1e}")
        assert real.embeddings and err < 1e-8
        svg = export_svg(real.embeddings, mirror=True)
        (tmp_path / "modes.svg").write_text(svg)
        assert svg.count('<g id="mode-') == 2 * len(real.embeddings)


def test_criterion_7_oracle_consistency(verdict):
    with verdict(7) as info:
        rng = np.random.default_rng(60)
        checked = 0
        while checked < 5:
            lengths = DistanceAssignment.from_vector([int(v) for v in np.round(rng.uniform(60, 240, 11))])
            count = assembly_count("V17", lengths)
            if count.degenerate:
                continue
            oracle = oracle_coordinate_count("V17", lengths)
            emb = len(embeddable_solutions("V17", lengths, count).embeddings)
            info.append(f"N {count.N} / embeddable {emb} / oracle {oracle.congruence_classes}")
            assert oracle.real % 2 == 0
            assert oracle.congruence_classes == emb
            checked += 1


def test_criterion_8_distance_identities(verdict):
    tri = LinkageGraph(3, [(1, 2), (1, 3), (2, 3)])
    m = cm_matrix(tri)
    with verdict(8) as info:
        rng = random.Random(8)
        for _ in range(100):
            a, b, c = (Fraction(rng.randint(1, 10**4), rng.randint(1, 100)) for _ in range(3))
            D = minor_polynomial(m, (1, 2, 3), DistanceAssignment({(1, 2): a, (1, 3): b, (2, 3): c}))
            assert D.terms.get((), Fraction(0)) == -(a + b + c) * (a + b - c) * (a + c - b) * (b + c - a)
        info.append("100 triangles exact")
        nrng = np.random.default_rng(8)
        worst = 0.0
        for _ in range(100):
            rep = verify_cayley_menger(nrng.normal(size=(7, 2)) * nrng.uniform(0.1, 100), tol=1e-9)
            worst = max(worst, rep.max_scaled_planar_minor)
            assert rep.vanishing and rep.rank == 4
        info.append(f"100 point sets rank 4, max scaled minor {worst:.1e}")


def test_criterion_9_closed_form_bounds(verdict, capsys):
    with verdict(9) as info:
        assert run_command(["--json", "bounds", "--n", "7"]) == 0
        doc = json.loads(capsys.readouterr().out)["result"]
        info.append(f"fan_lower {doc['fan_lower']}, growth constant {doc['growth_constant']:.5f}")
        assert doc["fan_lower"] == 56
        assert abs(doc["growth_constant"] - 2.3003) < 1e-4
        assert abs(FAN_GROWTH_CONSTANT - 28 ** 0.25) < 1e-15
