"""Well enumeration, barrier costs, and the Agmon distance field."""

import math

import numpy as np
import pytest
from pytest import approx

from reslab.errors import (
    DegenerateDepths,
    NoMinimum,
    OutOfDomain,
    TieAtGlobalMin,
    TooLarge,
)
from reslab.potential import PolyTerm, PotentialSpec, build_potential
from reslab.wells import (
    agmon_distance,
    agmon_field,
    barrier_cost,
    barrier_cost_bruteforce,
    barrier_cost_grid,
    find_minima,
    well_structure,
)

TILTED = "core = poly(1, 0.2, -2, 0, 1)"          # quartic with a 0.2x tilt
SYMMETRIC = "core = poly(1, 0, -2, 0, 1)"

THREE_WELLS = ("core = poly(0, 0, 0.5) + gauss(-1.5, -2.0, 0.35) "
               "+ gauss(1.5, -0.9, 0.35)")


def test_find_minima_matches_polynomial_roots():
    spec = build_potential(TILTED)
    minima = find_minima(spec, (-3.0, 3.0), 4001)
    # the outer two real roots of F' = 4x^3 - 4x + 0.2 are the minima
    roots = sorted(r.real for r in np.roots([4.0, 0.0, -4.0, 0.2])
                   if abs(r.imag) < 1e-12)
    assert len(minima) == 2
    xs = sorted(x for x, _ in minima)
    assert xs[0] == approx(roots[0], abs=1e-9)
    assert xs[1] == approx(roots[2], abs=1e-9)
    # deepest first
    assert minima[0][1] < minima[1][1]
    assert minima[0][0] == approx(-1.0241203002150503, abs=1e-9)
    assert minima[1][1] == approx(0.19743415285827637, abs=1e-9)


def test_well_structure_reference(ref_spec):
    ws = well_structure(ref_spec, (-6.0, 6.0))
    assert len(ws.minima) == 2
    assert ws.minima[0][0] == approx(-0.9999936109618867, abs=1e-9)
    assert ws.minima[0][1] == approx(-2.800008944324759, abs=1e-9)
    assert ws.minima[1][0] == approx(0.9999913035684447, abs=1e-9)
    assert ws.depths[0] == approx(2.1723441806414794, rel=1e-12)
    assert ws.d0 == math.inf
    assert ws.to_dict()["d0"] == "inf"
    # deepening the second well shifts the barrier of the remaining one
    deeper = well_structure(build_potential(
        "core = gauss(-1, -2.8, 0.4) + gauss(1, -2.45, 0.4)\n"
        "tail.a = 0.5\ntail.coeff = 4.0\nglue_radius = 3.0"), (-6.0, 6.0))
    assert deeper.depths[0] == approx(2.21995239186251, rel=1e-9)


def test_three_wells_sorted_by_depth():
    ws = well_structure(build_potential(THREE_WELLS), (-6.0, 6.0))
    assert len(ws.minima) == 3
    assert ws.depths[0] == approx(0.12050616296284, rel=1e-9)
    assert ws.depths[1] == approx(0.10773875184694214, rel=1e-9)
    assert ws.depths[0] > ws.depths[1]


def test_well_structure_guards():
    with pytest.raises(TieAtGlobalMin):
        well_structure(build_potential(SYMMETRIC), (-3.0, 3.0))
    with pytest.raises(DegenerateDepths):
        well_structure(build_potential(
            "core = poly(0, 0, 0.25) + gauss(0, -3, 0.4) "
            "+ gauss(-1.5, -1, 0.3) + gauss(1.5, -1, 0.3)"), (-6.0, 6.0))
    linear = PotentialSpec(1, (PolyTerm((0.0, 1.0)),), None, None, math.inf)
    with pytest.raises(NoMinimum):
        find_minima(linear, (-3.0, 3.0), 4001)
    with pytest.raises(ValueError):
        find_minima(build_potential(TILTED), (-3.0, 3.0), 99)


def test_barrier_cost_line_values():
    tilted = build_potential(TILTED)
    shallow, deep = 0.9739943532312778, -1.0241203002150503
    assert barrier_cost(tilted, shallow, [deep]) == approx(
        0.8075721286282695, abs=1e-9)
    symmetric = build_potential(SYMMETRIC)
    assert barrier_cost(symmetric, 1.0, [-1.0]) == approx(1.0, abs=1e-9)
    assert barrier_cost(tilted, shallow, [shallow, deep]) == 0.0
    with pytest.raises(OutOfDomain):
        barrier_cost(tilted, shallow, [])


def test_barrier_cost_grid_line():
    F = np.array([0.0, 3.0, 1.0, 4.0, 0.0])
    assert barrier_cost_grid(F, 0, [4]) == 4.0
    assert barrier_cost_grid(F, 0, [2]) == 3.0
    assert barrier_cost_grid(F, 2, [0]) == 2.0


def test_barrier_grid_matches_bruteforce_continuous():
    rng = np.random.default_rng(42)
    for _ in range(20):
        F = rng.uniform(0.0, 1.0, size=(4, 4))
        si, sj = (int(v) for v in rng.integers(0, 4, size=2))
        ti, tj = (int(v) for v in rng.integers(0, 4, size=2))
        if (ti, tj) == (si, sj):
            ti = (ti + 1) % 4
        assert barrier_cost_grid(F, (si, sj), [(ti, tj)]) == \
            barrier_cost_bruteforce(F, (si, sj), [(ti, tj)])


def test_bruteforce_size_guard():
    with pytest.raises(TooLarge):
        barrier_cost_bruteforce(np.zeros((8, 8)), (0, 0), [(7, 7)])


def test_agmon_distance_quadratic(harmonic_spec):
    # F = x^2/2 gives sqrt(V) = |x|/2, so d(y, 0) = y^2/4
    for y in (0.7, 1.3, 2.0):
        assert agmon_distance(harmonic_spec, y, [0.0]) == approx(
            y * y / 4.0, rel=1e-8)


def test_agmon_field_matches_pointwise(ref_spec):
    nodes = np.linspace(-6.0, 6.0, 801)
    fld = agmon_field(ref_spec, nodes, [-1.0, 1.0])
    worst = max(abs(fld.dist[k] - agmon_distance(ref_spec, nodes[k], [-1.0, 1.0]))
                for k in range(0, 801, 40))
    assert worst < 1e-4


def test_agmon_field_2d_radial():
    # the 2D field evaluates the radial profile of a 1D spec on the plane
    spec = build_potential("core = poly(0, 0, 1)")
    xs = np.linspace(-1.5, 1.5, 121)
    fld = agmon_field(spec, (xs, xs), [(0.0, 0.0)])
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    R2 = X * X + Y * Y
    mask = np.sqrt(R2) > 0.5
    rel = np.abs(fld.dist[mask] - R2[mask] / 2.0) / (R2[mask] / 2.0)
    assert rel.max() < 0.03


def test_agmon_distance_rejects_3d():
    spec = build_potential("dimension = 3\ncore = poly(0, 0, 0.5)")
    with pytest.raises(OutOfDomain):
        agmon_distance(spec, 2.0, [1.0])
