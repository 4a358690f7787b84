"""Discretization: factored interior scheme, contour maps, scaled operators."""

import math

import numpy as np
import pytest
import scipy.io
from pytest import approx

from reslab.errors import ConeViolation, GridTooCoarse, TruncationTooTight
from reslab.operators import (
    Grid1D,
    ScalingContour,
    assemble_exterior_dirichlet_scaled,
    assemble_full_scaled,
    assemble_interior,
    contour_map,
    write_operator_mm,
)
from reslab.potential import (
    PolyTerm,
    PotentialSpec,
    build_potential,
    eval_potential,
    eval_V_rotated,
)
from reslab.solvers import lowest_eigs, tridiag_matvec

ZERO_SPEC = PotentialSpec(1, (PolyTerm((0.0,)),), None, None, math.inf)


def test_grid_basics():
    g = Grid1D(0.0, 1.0, 19)
    assert g.h == approx(1.0 / 20.0, rel=1e-15)
    nodes = g.nodes()
    assert len(nodes) == 19
    assert nodes[0] == approx(g.h)
    assert nodes[-1] == approx(1.0 - g.h)
    with pytest.raises(ValueError):
        Grid1D(1.0, 0.0, 31)
    with pytest.raises(ValueError):
        Grid1D(0.0, 1.0, 15)


def test_free_laplacian_rows_and_spectrum():
    # V = 0 collapses the factored scheme to the plain second difference
    op = assemble_interior(ZERO_SPEC, 0.25, 1.0, 31)
    assert np.all(op.diag == 32.0)
    assert np.all(op.offdiag == -16.0)
    lams = lowest_eigs(op, 3).eigenvalues
    for k in (1, 2, 3):
        assert lams[k - 1] == approx(32.0 * (1.0 - math.cos(k * math.pi / 32.0)),
                                     abs=1e-8)


def test_harmonic_levels_converge_at_h2(harmonic_spec):
    errs = []
    for N in (1000, 2001, 4003):
        lam1 = lowest_eigs(assemble_interior(harmonic_spec, 0.1, 6.0, N),
                           2).eigenvalues[1]
        errs.append(abs(lam1 - 0.1))
    assert errs[1] < 1e-4 * 0.1
    # spacing halves at each step, so h^2 convergence shows a factor ~4
    assert errs[0] / errs[1] == approx(4.0, abs=0.1)
    assert errs[1] / errs[2] == approx(4.0, abs=0.1)


def test_coarseness_guard():
    spec = build_potential("core = poly(0, 0, 0.5) + gauss(0, -1, 0.25)")
    with pytest.raises(GridTooCoarse):
        assemble_interior(spec, 0.1, 6.0, 17)
    lam1 = lowest_eigs(assemble_interior(spec, 0.1, 6.0, 1601),
                       2).eigenvalues[1]
    assert lam1 == approx(0.319478172, rel=1e-6)


def test_three_d_swave_levels():
    spec = build_potential("dimension = 3\ncore = poly(0, 0, 0.5)")
    lams = lowest_eigs(assemble_interior(spec, 0.1, 8.0, 3000),
                       3).eigenvalues
    assert abs(lams[0]) < 1e-5
    assert lams[1] == approx(0.2, rel=5e-5)
    assert lams[2] == approx(0.4, rel=5e-5)


def test_factored_scheme_annihilates_ground_state(ref_spec):
    # e^{-F/(2 eps)} restricted to the grid is an exact kernel vector of
    # the factored discretization, up to roundoff
    eps = 0.15
    op = assemble_interior(ref_spec, eps, 6.0, 801)
    F = eval_potential(ref_spec, op.grid.nodes(), eps).F
    u = np.exp(-(F - F.min()) / (2.0 * eps))
    defect = np.max(np.abs(tridiag_matvec(op.diag, op.offdiag, u)))
    assert defect <= 1e-13 * op.row_scale() * np.max(np.abs(u))


def test_contour_map_sharp_and_smooth():
    sharp = ScalingContour(10.0, 0.3, "sharp", 0.0)
    z, zp = contour_map(sharp, 20.0)
    assert z == approx(10.0 + 10.0 * np.exp(0.3j), rel=1e-15)
    assert zp == approx(np.exp(0.3j), rel=1e-15)
    z_in, zp_in = contour_map(sharp, 7.0)
    assert z_in == 7.0 + 0.0j
    assert zp_in == 1.0 + 0.0j

    r = np.linspace(0.5, 30.0, 97)
    for mode, w in (("sharp", 0.0), ("smooth", 0.5)):
        c0 = ScalingContour(10.0, 0.0, mode, w)
        z0, zp0 = contour_map(c0, r)
        assert np.array_equal(z0, r.astype(complex))
        assert np.array_equal(zp0, np.ones_like(r, dtype=complex))

    smooth = ScalingContour(10.0, 0.3, "smooth", 0.7)
    zs, zps = contour_map(smooth, r)
    zh, _ = contour_map(sharp, r)
    assert np.max(np.abs(zs - zh)) <= abs(np.exp(0.3j) - 1.0) * 0.7 + 1e-14
    # ten widths past the radius the slope has locked onto the rotated ray
    _, zp_far = contour_map(smooth, 17.0)
    assert abs(zp_far - np.exp(0.3j)) < 1e-8


def test_contour_mode_validation():
    with pytest.raises(ValueError):
        ScalingContour(10.0, 0.3, "bent", 0.0)
    with pytest.raises(ValueError):
        ScalingContour(10.0, 0.3, "smooth", 0.0)


def test_full_scaled_symmetry_and_real_reduction(ref_spec):
    rot = assemble_full_scaled(ref_spec, 0.15,
                               ScalingContour(6.0, 0.3, "sharp", 0.0),
                               1001, 24.0)
    assert rot.kind == "complex-sym"
    A = rot.to_dense()
    assert np.array_equal(A, A.T)
    assert np.abs(A.imag).max() > 0.0
    flat = assemble_full_scaled(ref_spec, 0.15,
                                ScalingContour(6.0, 0.0, "sharp", 0.0),
                                1001, 24.0)
    assert flat.kind == "real-sym"
    assert flat.diag.dtype == np.float64


def test_full_scaled_rows(ref_spec):
    contour = ScalingContour(6.0, 0.3, "sharp", 0.0)
    rot = assemble_full_scaled(ref_spec, 0.15, contour, 1001, 24.0)
    flat = assemble_full_scaled(ref_spec, 0.15,
                                ScalingContour(6.0, 0.0, "sharp", 0.0),
                                1001, 24.0)
    # rows fully inside the scaling radius are the factored real rows
    assert np.array_equal(rot.diag[380:620], flat.diag[380:620])
    assert np.array_equal(rot.diag[380:620].imag, np.zeros(240))

    # an exterior row follows the midpoint-jacobian recipe exactly
    k = 900
    x = rot.grid.nodes()
    h = rot.grid.h
    c0 = 0.15 ** 2 / h ** 2
    ml = (abs(x[k - 1]) + abs(x[k])) / 2.0
    mr = (abs(x[k]) + abs(x[k + 1])) / 2.0
    _, zpl = contour_map(contour, ml)
    _, zpr = contour_map(contour, mr)
    want_diag = c0 * (1.0 / zpl ** 2 + 1.0 / zpr ** 2) \
        + eval_V_rotated(ref_spec, abs(x[k]), 0.3, 6.0, 0.15)
    assert rot.diag[k] == want_diag
    assert rot.offdiag[k] == -c0 / zpr ** 2


def test_free_ray_exterior_spectrum():
    # V = 0 on a rotated ray: eigenvalues are the Dirichlet laplacian's
    # rotated by e^{-2 i beta}
    op = assemble_exterior_dirichlet_scaled(
        ZERO_SPEC, 0.2, ScalingContour(1.0, 0.3, "sharp", 0.0), 64, 4.0)
    got = np.sort_complex(np.linalg.eigvals(op.to_dense()))
    h = 3.0 / 65.0
    c0 = 0.04 / h ** 2
    want = np.sort_complex(np.array(
        [np.exp(-0.6j) * 2.0 * c0 * (1.0 - math.cos(k * math.pi / 65.0))
         for k in range(1, 65)]))
    assert np.max(np.abs(got - want)) < 1e-10


def test_exterior_grid_and_spectral_floor(ref_spec):
    op = assemble_exterior_dirichlet_scaled(
        ref_spec, 0.15, ScalingContour(6.0, 0.0, "sharp", 0.0), 256, 24.0)
    nodes = op.grid.nodes()
    assert nodes[0] > 6.0 and nodes[-1] < 24.0
    lam0 = lowest_eigs(op, 1).eigenvalues[0]
    v_min = eval_potential(ref_spec, nodes, 0.15).V_eps.min()
    assert lam0 >= v_min - 1e-12


def test_assembly_guards(ref_spec):
    with pytest.raises(ValueError):
        assemble_full_scaled(ref_spec, 0.15,
                             ScalingContour(6.0, 0.3, "sharp", 0.0),
                             1001, 12.0)
    with pytest.raises(ConeViolation):
        assemble_full_scaled(ref_spec, 0.15,
                             ScalingContour(6.0, 0.6, "sharp", 0.0),
                             1001, 24.0)
    with pytest.raises(TruncationTooTight):
        assemble_full_scaled(ref_spec, 0.1,
                             ScalingContour(10.0, 0.01, "sharp", 0.0),
                             2001, 40.0, check_truncation=True)
    assemble_full_scaled(ref_spec, 0.1,
                         ScalingContour(10.0, 0.3, "sharp", 0.0),
                         2001, 40.0, check_truncation=True)


def test_matrix_market_round_trip(ref_spec, tmp_path):
    op = assemble_full_scaled(ref_spec, 0.2,
                              ScalingContour(6.0, 0.3, "sharp", 0.0),
                              51, 24.0)
    path = tmp_path / "op.mtx"
    write_operator_mm(op, path)
    back = scipy.io.mmread(path).toarray()
    assert np.array_equal(back, op.to_dense())
