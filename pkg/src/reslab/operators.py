"""Tridiagonal discretizations of the interior, exterior and full operators.

The kinetic term is assembled in factored (exponentially fitted) form inside
the scaling radius: with phi = F/2 (minus eps*log r for the radial s-wave
channel) the bond weights are exponentials of phi increments,

    diag_k  = (eps^2/h^2) (e^{-dphi_k/eps} + e^{+dphi_{k-1}/eps}),
    offdiag = -eps^2/h^2,

which agrees with the textbook rows 2 eps^2/h^2 + V_eps to O(h^2) but is
positive semidefinite with e^{-phi/eps} as an exact discrete kernel.  That is
what keeps eigenvalues of size e^{-d/eps} at *relative* accuracy; plain
central differences lose them entirely to cancellation at these scales.

Outside the scaling radius the complex-scaled rows use the one-sided contour
Jacobian at bond midpoints, so the sharp-contour jump never sits on a node.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConeViolation, GridTooCoarse, TruncationTooTight
from .potential import (
    PotentialSpec,
    _core_V_eps_complex,
    _eval_F,
    _tail_V_eps_complex,
    eval_potential,
)


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid of N interior nodes on (x_min, x_max), Dirichlet ends."""

    x_min: float
    x_max: float
    N: int

    def __post_init__(self):
        if self.N < 16:
            raise ValueError(f"N={self.N} below the minimum of 16")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.N + 1)

    def nodes(self) -> np.ndarray:
        return self.x_min + self.h * np.arange(1, self.N + 1)


@dataclass(frozen=True)
class ScalingContour:
    """Exterior scaling map: identity inside r0, rotated by beta outside.

    sharp:  z = r0 + (r - r0) e^{i beta} for r > r0.
    smooth: z = r + (e^{i beta} - 1) g(r - r0), g(s) = s - w tanh(s/w),
            which keeps z(r) = r exactly for r <= r0 and approaches the
            sharp ray at rate e^{-2(r-r0)/w}.
    """

    r0: float
    beta: float
    mode: str = "sharp"
    w: float = 0.0

    def __post_init__(self):
        if self.mode not in ("sharp", "smooth"):
            raise ValueError(f"unknown contour mode {self.mode!r}")
        if self.mode == "smooth" and self.w <= 0:
            raise ValueError("smooth contour needs a positive width w")


@dataclass(frozen=True)
class DiscretizedOperator:
    """Symmetric tridiagonal operator with grid and contour metadata."""

    kind: str                       # "real-sym" | "complex-sym"
    diag: np.ndarray
    offdiag: np.ndarray
    eps: float
    grid: Grid1D | None = None
    boundary: tuple = ("dirichlet", "dirichlet")
    contour: ScalingContour | None = None

    @property
    def N(self) -> int:
        return len(self.diag)

    @property
    def h(self) -> float:
        return self.grid.h if self.grid is not None else 1.0

    def row_scale(self) -> float:
        """Infinity-norm style scale used for residual/noise thresholds."""
        s = float(np.max(np.abs(self.diag)))
        if len(self.offdiag):
            s += 2.0 * float(np.max(np.abs(self.offdiag)))
        return s

    def to_dense(self) -> np.ndarray:
        A = np.diag(self.diag)
        n = self.N
        for k in range(n - 1):
            A[k, k + 1] = self.offdiag[k]
            A[k + 1, k] = self.offdiag[k]
        return A


def contour_map(contour: ScalingContour, r):
    """(z(r), z'(r)) for real r, broadcast over arrays."""
    r_arr = np.asarray(r, dtype=float)
    b = contour.beta
    eib = cmath.exp(1j * b)
    if contour.mode == "sharp":
        outside = r_arr > contour.r0
        z = np.where(outside, contour.r0 + (r_arr - contour.r0) * eib,
                     r_arr.astype(complex))
        zp = np.where(outside, eib, 1.0 + 0j)
    else:
        s = r_arr - contour.r0
        pos = s > 0
        sw = np.where(pos, s / contour.w, 0.0)
        g = np.where(pos, s - contour.w * np.tanh(sw), 0.0)
        gp = np.where(pos, np.tanh(sw) ** 2, 0.0)
        z = r_arr + (eib - 1.0) * g
        zp = 1.0 + (eib - 1.0) * gp
    if np.ndim(r) == 0:
        return complex(z), complex(zp)
    return z, zp


def _coarseness_guard(V_eps: np.ndarray, h: float, eps: float):
    """Second-difference probe of V curvature vs the target scale eps.

    Order-of-magnitude sanity only: h^2 max|V''| staying within 10 eps keeps
    the unresolved potential variation below the level spacing.  Accuracy is
    the grid policy's job; this catches grids that are absurd, not ones that
    are merely coarse.
    """
    if len(V_eps) < 3:
        return
    vpp = np.abs(np.diff(V_eps, 2)) / h**2
    if h * h * float(np.max(vpp)) > 10.0 * eps:
        raise GridTooCoarse(
            f"h={h:.3g} cannot resolve the potential curvature at scale "
            f"eps={eps:.3g}")


def _factored_bonds(spec: PotentialSpec, xb: np.ndarray, eps: float):
    """phi increments over bonds; phi = F/2, s-wave channel adds -eps log r."""
    F = _eval_F(spec, xb)[0]
    phi = 0.5 * F
    if spec.dimension == 3:
        with np.errstate(divide="ignore"):
            phi = phi - eps * np.log(np.maximum(xb, 0.0))
    return np.diff(phi)


def assemble_interior(spec: PotentialSpec, eps: float, r0: float, N: int
                      ) -> DiscretizedOperator:
    """Interior Dirichlet operator on (-r0, r0) (1D) or (0, r0) (s-wave).

    The s-wave channel works on u = r f with u(0) = 0; the log-weight in phi
    makes the r=0 bond weight vanish, which *is* that boundary condition.
    """
    if spec.dimension == 3:
        grid = Grid1D(0.0, float(r0), int(N))
    else:
        grid = Grid1D(-float(r0), float(r0), int(N))
    h = grid.h
    x = grid.nodes()
    xb = np.concatenate([[grid.x_min], x, [grid.x_max]])
    with np.errstate(over="raise"):
        dphi = _factored_bonds(spec, xb, eps)
        c = eps * eps / (h * h)
        diag = c * (np.exp(-dphi[1:] / eps) + np.exp(dphi[:-1] / eps))
    offdiag = np.full(len(x) - 1, -c)
    _coarseness_guard(eval_potential(spec, x, eps).V_eps, h, eps)
    return DiscretizedOperator(kind="real-sym", diag=diag, offdiag=offdiag,
                               eps=eps, grid=grid)


def _V_eps_on_contour(spec: PotentialSpec, contour: ScalingContour,
                      r: np.ndarray, eps: float) -> np.ndarray:
    """V_eps(z(r)) for real r >= 0, complex beyond the contour radius."""
    z, _ = contour_map(contour, r)
    out = np.empty(len(r), dtype=complex)
    inside = np.asarray(r) <= contour.r0
    if inside.any():
        out[inside] = eval_potential(spec, np.asarray(r)[inside], eps).V_eps
    if (~inside).any():
        zo = np.asarray(z)[~inside]
        if spec.has_tail:
            out[~inside] = _tail_V_eps_complex(spec, zo, eps)
        else:
            out[~inside] = _core_V_eps_complex(spec, zo, eps)
    return out


def _check_truncation(spec: PotentialSpec, eps: float,
                      contour: ScalingContour, R_max: float):
    """Estimate the damping the rotated stretch applies to an outgoing wave.

    The barrier integral int sqrt(V) from r0 to R_max picks up an imaginary
    part ~ sin(beta) along the ray; if e^{-2 sin(beta) S / eps} is not small
    the Dirichlet wall at R_max reflects back into the resonance region.
    """
    r = np.linspace(contour.r0, R_max, 2001)
    V = np.maximum(eval_potential(spec, r, 0.0).V, 0.0)
    S = float(np.trapezoid(np.sqrt(V), r))
    damping = math.exp(-2.0 * math.sin(abs(contour.beta)) * S / eps)
    if damping > 1e-3:
        raise TruncationTooTight(
            f"R_max={R_max:.3g} damps the outgoing wave only by "
            f"{damping:.2e} (need <= 1e-3); widen the box or the angle")


def assemble_full_scaled(spec: PotentialSpec, eps: float,
                         contour: ScalingContour, N: int, R_max: float,
                         check_truncation: bool = False
                         ) -> DiscretizedOperator:
    """Exterior-scaled operator on the truncated box, Dirichlet at both ends.

    1D scales both half-lines via x -> sign(x) z(|x|); bonds whose midpoint
    lies inside the contour radius keep the factored real rows, bonds outside
    get the complex midpoint Jacobian a = 1/z'(mid)^2 and the node potential
    V_eps(z(r)).  At beta = 0 every branch reduces to the real operator.
    """
    if abs(contour.beta) > spec.beta0 + 1e-15:
        raise ConeViolation(
            f"beta={contour.beta} outside the verified cone {spec.beta0}")
    if R_max < 3.0 * contour.r0:
        raise ValueError(f"R_max={R_max} must be at least 3 r0")
    if check_truncation:
        _check_truncation(spec, eps, contour, R_max)

    if spec.dimension == 3:
        grid = Grid1D(0.0, float(R_max), int(N))
    else:
        grid = Grid1D(-float(R_max), float(R_max), int(N))
    h = grid.h
    x = grid.nodes()
    xb = np.concatenate([[grid.x_min], x, [grid.x_max]])
    mid = 0.5 * (xb[:-1] + xb[1:])
    c = eps * eps / (h * h)

    inside_bond = np.abs(mid) < contour.r0
    # one-sided Jacobians at the outside midpoints
    _, zp_mid = contour_map(contour, np.abs(mid))
    a_bond = np.where(inside_bond, 1.0 + 0j, 1.0 / zp_mid**2)

    with np.errstate(over="raise"):
        dphi = _factored_bonds(spec, xb, eps)
        left = np.where(inside_bond[:-1],
                        c * np.exp(dphi[:-1] / eps), c * a_bond[:-1])
        right = np.where(inside_bond[1:],
                         c * np.exp(-dphi[1:] / eps), c * a_bond[1:])
    diag = left + right
    offdiag = -c * a_bond[1:-1]

    outside_node = np.abs(x) >= contour.r0
    if outside_node.any():
        diag = diag.astype(complex)
        diag[outside_node] += _V_eps_on_contour(
            spec, contour, np.abs(x[outside_node]), eps)

    if contour.beta == 0.0:
        diag = np.real(diag)
        offdiag = np.real(offdiag)
        kind = "real-sym"
    else:
        kind = "complex-sym"
    return DiscretizedOperator(kind=kind, diag=diag, offdiag=offdiag,
                               eps=eps, grid=grid, contour=contour)


def assemble_exterior_dirichlet_scaled(spec: PotentialSpec, eps: float,
                                       contour: ScalingContour, N: int,
                                       R_max: float) -> DiscretizedOperator:
    """Scaled operator on (r0, R_max) with Dirichlet walls at both ends."""
    if abs(contour.beta) > spec.beta0 + 1e-15:
        raise ConeViolation(
            f"beta={contour.beta} outside the verified cone {spec.beta0}")
    grid = Grid1D(float(contour.r0), float(R_max), int(N))
    h = grid.h
    r = grid.nodes()
    rb = np.concatenate([[grid.x_min], r, [grid.x_max]])
    mid = 0.5 * (rb[:-1] + rb[1:])
    c = eps * eps / (h * h)
    _, zp_mid = contour_map(contour, mid)
    a_bond = 1.0 / zp_mid**2
    diag = c * (a_bond[:-1] + a_bond[1:]) + _V_eps_on_contour(
        spec, contour, r, eps)
    offdiag = -c * a_bond[1:-1]
    if contour.beta == 0.0:
        diag = np.real(diag)
        offdiag = np.real(offdiag)
        kind = "real-sym"
    else:
        kind = "complex-sym"
    return DiscretizedOperator(kind=kind, diag=diag, offdiag=offdiag,
                               eps=eps, grid=grid, contour=contour)


def write_operator_mm(op: DiscretizedOperator, path) -> None:
    """Export as a MatrixMarket coordinate file for external validation."""
    from scipy import io as sio
    from scipy import sparse

    n = op.N
    A = sparse.diags([op.offdiag, op.diag, op.offdiag], [-1, 0, 1],
                     shape=(n, n), format="coo")
    sio.mmwrite(str(path), A)
