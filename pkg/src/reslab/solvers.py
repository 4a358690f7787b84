"""Eigen- and resonance solvers for the tridiagonal operators.

Real interior spectra come from Sturm bisection (LAPACK's stebz via
eigh_tridiagonal) with the count re-verified by our own LDL^T inertia pass;
eigenvectors come from a fixed-depth inverse iteration rather than from the
library, because residual-converged vectors stop refining their far tails at
~1e-16 of the sup norm while the decay and quasimode diagnostics need those
tails honest down to e^{-d/eps}.  Forty extra solves per vector buy that
(contraction per pass is lambda_1/lambda_2, typically ~1e-5 here).

Complex resonances use shift-invert power iteration on the scaled operator
with partially pivoted tridiagonal solves; the Rayleigh update is gated until
the iterate is already close so the iteration cannot hop to a neighbor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal, solve_banded

from .errors import (
    ClusterUnresolved,
    NoConvergence,
    ResonanceNotFound,
    SingularShift,
)
from .operators import (
    DiscretizedOperator,
    ScalingContour,
    assemble_full_scaled,
)

_MACHEPS = float(np.finfo(float).eps)
_VEC_ITERS = 40          # fixed inverse-iteration depth for honest tails
_START_SEED = 0x5EED     # deterministic start vectors


@dataclass(frozen=True)
class SpectrumResult:
    """Low-lying eigenpairs of a real operator, h-weighted normalization."""

    eigenvalues: np.ndarray
    vectors: np.ndarray          # column i is the i-th eigenvector
    residuals: np.ndarray


@dataclass(frozen=True)
class ResonanceResult:
    """A converged complex eigenvalue with its seed and stability drifts."""

    seed: float
    mu: complex
    theta_drift: float
    grid_drift: float
    iterations: int

    def to_dict(self) -> dict:
        return {"seed": float(self.seed), "re_mu": float(self.mu.real),
                "im_mu": float(self.mu.imag),
                "theta_drift": float(self.theta_drift),
                "grid_drift": float(self.grid_drift),
                "iterations": int(self.iterations)}


# ---------------------------------------------------------------------------
# tridiagonal primitives
# ---------------------------------------------------------------------------

def tridiag_matvec(diag, offdiag, u):
    out = diag * u
    out[:-1] += offdiag * u[1:]
    out[1:] += offdiag * u[:-1]
    return out


def _solve_shifted(diag, offdiag, shift, rhs):
    """(T - shift) x = rhs via banded LU with partial pivoting."""
    n = len(diag)
    dt = np.result_type(diag.dtype, type(shift), rhs.dtype)
    ab = np.zeros((3, n), dtype=dt)
    ab[0, 1:] = offdiag
    ab[1, :] = diag - shift
    ab[2, :-1] = offdiag
    return solve_banded((1, 1), ab, rhs)


def sturm_count_below(diag, offdiag, level) -> int:
    """Number of eigenvalues strictly below level, by LDL^T inertia."""
    t = float(diag[0]) - level
    count = 1 if t < 0 else 0
    tiny = _MACHEPS * (abs(level) + np.max(np.abs(diag)))
    for i in range(1, len(diag)):
        if t == 0.0:
            t = tiny if tiny > 0 else _MACHEPS
        t = (diag[i] - level) - offdiag[i - 1] ** 2 / t
        if t < 0:
            count += 1
    return count


def _hnorm(u, h):
    return math.sqrt(h) * float(np.linalg.norm(u))


# ---------------------------------------------------------------------------
# real interior spectra
# ---------------------------------------------------------------------------

def lowest_eigs(op: DiscretizedOperator, k: int, tol: float = 1e-12
                ) -> SpectrumResult:
    """k lowest eigenpairs of a real-symmetric tridiagonal operator.

    Eigenvalues by Sturm bisection, re-checked against our own inertia
    count; eigenvectors by fixed-depth inverse iteration with Gram-Schmidt
    against near-degenerate partners.  Raises ClusterUnresolved when the
    k-th and (k+1)-th eigenvalues cannot be told apart at tol * scale.
    """
    if op.kind != "real-sym":
        raise ValueError("lowest_eigs needs a real-sym operator")
    n = op.N
    if k > n:
        raise ValueError(f"k={k} exceeds matrix size {n}")
    d = np.asarray(op.diag, dtype=float)
    e = np.asarray(op.offdiag, dtype=float)
    scale = op.row_scale()

    k_probe = min(k + 1, n)
    w = eigh_tridiagonal(d, e, select="i", select_range=(0, k_probe - 1),
                         eigvals_only=True, lapack_driver="stebz")
    if k_probe > k and (w[k] - w[k - 1]) < tol * scale:
        raise ClusterUnresolved(
            f"gap {w[k] - w[k - 1]:.3e} between eigenvalue {k - 1} and {k} "
            f"below {tol:.1e} * scale")
    lam = w[:k]

    # independent inertia verification of the bisection count
    if k_probe > k:
        probe = 0.5 * (w[k - 1] + w[k])
    else:
        probe = w[k - 1] + max(tol * scale, 1e-12 * abs(w[k - 1]))
    got = sturm_count_below(d, e, probe)
    if got != k:
        raise ClusterUnresolved(
            f"inertia count {got} below probe disagrees with requested {k}")

    h = op.h
    rng = np.random.default_rng(_START_SEED)
    vectors = np.empty((n, k))
    residuals = np.empty(k)
    for i in range(k):
        u = rng.standard_normal(n)
        shift = lam[i]
        for it in range(_VEC_ITERS):
            try:
                v = _solve_shifted(d, e, shift, u)
            except np.linalg.LinAlgError:
                v = None
            if v is None or not np.all(np.isfinite(v)):
                shift = lam[i] - (1e-14 + abs(lam[i]) * 1e-12) * (it + 1)
                continue
            # project off close-by partners so the iteration cannot drift
            for j in range(i):
                if abs(lam[i] - lam[j]) < 1e-6 * scale:
                    v -= np.dot(vectors[:, j], v) * h * vectors[:, j]
            u = v / np.linalg.norm(v)
        u = u / _hnorm(u, h)
        if u[np.argmax(np.abs(u))] < 0:
            u = -u
        vectors[:, i] = u
        residuals[i] = _hnorm(tridiag_matvec(d, e, u) - lam[i] * u, h)
    return SpectrumResult(eigenvalues=lam.copy(), vectors=vectors,
                          residuals=residuals)


# ---------------------------------------------------------------------------
# complex shift-invert
# ---------------------------------------------------------------------------

def _bilinear_rayleigh(d, e, u, fallback):
    """Complex-symmetric Rayleigh quotient u^T T u / u^T u (no conjugate)."""
    denom = np.dot(u, u)
    if abs(denom) < 1e-8:
        return fallback  # quasi-null vector; keep the previous estimate
    return np.dot(u, tridiag_matvec(d, e, u)) / denom


def _shift_invert(op: DiscretizedOperator, shift: complex, tol: float,
                  max_iter: int):
    d = np.asarray(op.diag)
    e = np.asarray(op.offdiag)
    scale = op.row_scale()
    floor = 3.0 * _MACHEPS * scale
    rng = np.random.default_rng(_START_SEED)
    u = rng.standard_normal(op.N) + 0j
    u /= np.linalg.norm(u)
    sigma = complex(shift)
    mu = sigma
    res = float("inf")
    retried = False
    for it in range(1, max_iter + 1):
        try:
            v = _solve_shifted(d, e, sigma, u)
            bad = not np.all(np.isfinite(v))
        except np.linalg.LinAlgError:
            bad = True
        if bad:
            if retried:
                raise SingularShift(f"shift {sigma} singular twice")
            retried = True
            sigma = sigma * (1 + 1e-8j) if sigma != 0 else 1e-8j * scale
            continue
        u = v / np.linalg.norm(v)
        mu = _bilinear_rayleigh(d, e, u, mu)
        res = float(np.linalg.norm(tridiag_matvec(d, e, u) - mu * u))
        if it >= 3 and res <= max(tol * abs(mu), floor):
            return mu, u / _hnorm(u, op.h), it
        if res < 1e-3 * abs(mu):
            sigma = mu  # Rayleigh acceleration only once already close
    raise NoConvergence(f"no convergence in {max_iter} iterations "
                        f"(last residual {res:.3e})")


def shift_invert_complex(op: DiscretizedOperator, shift: complex,
                         tol: float = 1e-10, max_iter: int = 500):
    """Eigenpair of the (complex symmetric) operator nearest the shift.

    The relative residual target is floored at the machine scale of the
    matrix: eigenvalues exponentially below ||T|| cannot satisfy a purely
    relative criterion in double precision.
    """
    mu, u, _ = _shift_invert(op, shift, tol, max_iter)
    return mu, u


# ---------------------------------------------------------------------------
# resonances
# ---------------------------------------------------------------------------

def find_resonances(spec, eps: float, contour: ScalingContour, seeds,
                    params: dict | None = None):
    """Resonances of the scaled operator seeded at interior eigenvalues.

    For each seed: shift-invert on the base grid, keep the eigenvalue only
    if it stays inside the disk |mu - seed| <= seed/2, then re-solve on
    beta +- beta_step (same grid) and on the halved grid to fill the drift
    diagnostics.  Failures are per-seed and come back in the second return
    value as (seed, reason) records instead of aborting the batch.
    """
    p = dict(params or {})
    N = int(p["N"])
    R_max = float(p["R_max"])
    tol = float(p.get("tol", 1e-10))
    max_iter = int(p.get("max_iter", 500))
    beta_step = float(p.get("beta_step", 0.05))
    check = bool(p.get("check_truncation", False))

    base = assemble_full_scaled(spec, eps, contour, N, R_max,
                                check_truncation=check)
    results, failures = [], []
    for seed in seeds:
        seed = float(seed)
        try:
            mu, _, iters = _shift_invert(base, seed, tol, max_iter)
            if abs(mu - seed) > 0.5 * abs(seed):
                raise ResonanceNotFound(
                    f"converged to {mu:.6e}, outside the seed disk of "
                    f"{seed:.6e}")
            drifts = []
            for db in (-beta_step, +beta_step):
                b2 = contour.beta + db
                if abs(b2) > spec.beta0:
                    continue
                c2 = ScalingContour(contour.r0, b2, contour.mode, contour.w)
                op2 = assemble_full_scaled(spec, eps, c2, N, R_max)
                mu2, _, _ = _shift_invert(op2, mu, tol, max_iter)
                drifts.append(abs(mu2 - mu))
            theta_drift = max(drifts) if drifts else float("nan")
            op_h = assemble_full_scaled(spec, eps, contour, 2 * N + 1, R_max)
            mu_h, _, _ = _shift_invert(op_h, mu, tol, max_iter)
            grid_drift = abs(mu_h - mu)
            results.append(ResonanceResult(seed=seed, mu=mu,
                                           theta_drift=theta_drift,
                                           grid_drift=grid_drift,
                                           iterations=iters))
        except (ResonanceNotFound, NoConvergence, SingularShift) as exc:
            failures.append({"seed": seed, "reason": f"{type(exc).__name__}: {exc}"})
    return results, failures


# ---------------------------------------------------------------------------
# decay and quasimode diagnostics
# ---------------------------------------------------------------------------

def decay_check(u: np.ndarray, field, eps: float) -> float:
    """sup over nodes of (eps ln|u| + dist), the decay-envelope excess.

    Nodes where |u| has fallen below 1e-13 of its peak are excluded: beyond
    that the stored values are roundoff, not amplitude, and would poison the
    sup with noise-times-distance.
    """
    dist = np.asarray(field.dist, dtype=float)
    u = np.asarray(u)
    au = np.abs(u)
    mask = au >= 1e-13 * float(np.max(au))
    vals = eps * np.log(au[mask]) + dist[mask]
    return float(np.max(vals))


def cutoff_profile(x: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """C^2 plateau cutoff: 1 for |x| <= lo, quintic smoothstep to 0 at hi."""
    s = np.clip((np.abs(x) - lo) / (hi - lo), 0.0, 1.0)
    return 1.0 - (6.0 * s**5 - 15.0 * s**4 + 10.0 * s**3)


def quasimode_residual(op_full: DiscretizedOperator, psi: np.ndarray,
                       lam: float) -> float:
    """||H psi - lam psi|| / ||psi|| in the h-weighted norm."""
    r = tridiag_matvec(np.asarray(op_full.diag), np.asarray(op_full.offdiag),
                       np.asarray(psi)) - lam * np.asarray(psi)
    return float(np.linalg.norm(r) / np.linalg.norm(psi))
