"""Drift potentials F and the Schrodinger potentials V, V_eps built from them.

A potential is a sum of polynomial and Gaussian core terms plus an optional
power-law tail t*|x|^a glued on with a C^2 quintic bridge.  The operator this
package studies is

    H_eps = -eps^2 Lap + V - (eps/2) Lap F,      V = |grad F|^2 / 4,

which is e^{F/2eps} (eps L) e^{-F/2eps} for the drift generator
L = -eps Lap + grad F . grad.  The quarter in V is what makes the well depths
of F (not some rescaling of them) govern the exponentially small eigenvalues.

Everything here is closed-form: core terms carry hand-coded derivatives, and
the tail extends to complex arguments for the exterior-scaling contour.
"""

from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import (
    FitFailed,
    HypothesesNotVerified,
    InsideCore,
    InvalidPotential,
    OutsideAnalyticityCone,
    ParseError,
)

DEFAULT_BETA0 = 0.5  # analyticity half-angle (rad); tails are analytic off the cut


# ---------------------------------------------------------------------------
# core terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolyTerm:
    """Polynomial sum_k c_k x^k, ascending coefficients."""

    coeffs: tuple[float, ...]

    def f(self, x):
        return P.polyval(x, self.coeffs)

    def f1(self, x):
        return P.polyval(x, P.polyder(self.coeffs))

    def f2(self, x):
        return P.polyval(x, P.polyder(self.coeffs, 2))


@dataclass(frozen=True)
class GaussTerm:
    """A * exp(-(x-c)^2 / (2 w^2)).  Entire, so usable on complex arguments."""

    center: float
    amp: float
    width: float

    def f(self, x):
        u = (x - self.center) / self.width
        return self.amp * np.exp(-0.5 * u * u)

    def f1(self, x):
        u = x - self.center
        return self.f(x) * (-u / self.width**2)

    def f2(self, x):
        u = x - self.center
        w2 = self.width**2
        return self.f(x) * (u * u / w2**2 - 1.0 / w2)


# ---------------------------------------------------------------------------
# spec
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PotentialSpec:
    """Analytic description of F: core terms + optional tail, C^2-glued.

    glue_coeffs holds one quintic per side (left, right), coefficients in the
    local variable u = |x| - R_glue on [0, 1].  Tail-free specs (confining
    cores) have glue_radius = inf and empty glue_coeffs.
    """

    dimension: int
    core_terms: tuple
    tail_a: float | None
    tail_coeff: float | None
    glue_radius: float
    glue_coeffs: tuple = field(default=())
    beta0: float = DEFAULT_BETA0

    @property
    def has_tail(self) -> bool:
        return math.isfinite(self.glue_radius)

    @property
    def gamma(self) -> float:
        """Decay exponent of V = (t a / 2)^2 r^(2a-2): gamma = 2 - 2a."""
        if not self.has_tail:
            raise InvalidPotential("confining spec has no tail decay exponent")
        return 2.0 - 2.0 * self.tail_a

    @property
    def tail_cv(self) -> float:
        """Exact tail constant: V = (t a / 2)^2 r^(-gamma)."""
        if not self.has_tail:
            raise InvalidPotential("confining spec has no tail constant")
        return (self.tail_coeff * self.tail_a / 2.0) ** 2


@dataclass(frozen=True)
class PotentialValues:
    """F and its derived Schrodinger potentials at a point (or array)."""

    F: np.ndarray
    gradF: np.ndarray
    laplF: np.ndarray
    V: np.ndarray
    V_eps: np.ndarray


@dataclass(frozen=True)
class ComplexRadius:
    """Scaled radius r0 + (r - r0) e^{i beta} for r >= r0, identity below."""

    r: float
    r0: float
    beta: float

    @property
    def value(self) -> complex:
        if self.r <= self.r0:
            return complex(self.r)
        return self.r0 + (self.r - self.r0) * complex(math.cos(self.beta),
                                                      math.sin(self.beta))


@dataclass(frozen=True)
class HypothesisReport:
    """Outcome of the tail checks: fitted decay law and derived constants.

    nontrap_min is min(|V'|/V)/c_V over the sampled tail, reported as-is.
    deriv_ratio_gamma and deriv_ratio_gamma1 are max |V'| r^g / C_V for
    g = gamma_fit and gamma_fit + 1; both normalizations are carried because
    only one of them can be bounded for a power tail and we do not decide
    which one a given consumer wants.
    """

    gamma_fit: float
    c_V: float
    C_V: float
    nontrap_min: float
    beta0: float
    passed: bool
    fit_residual: float = 0.0
    deriv_ratio_gamma: float = float("nan")
    deriv_ratio_gamma1: float = float("nan")


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_TERM_RE = re.compile(r"(poly|gauss)\s*\(([^)]*)\)")


def _parse_core(text: str):
    """Parse 'poly(c0, c1, ...) + gauss(center, amp, width) + ...'."""
    terms = []
    consumed = []
    for m in _TERM_RE.finditer(text):
        consumed.append((m.start(), m.end()))
        kind, args = m.group(1), m.group(2)
        try:
            vals = [float(a) for a in args.split(",") if a.strip()]
        except ValueError as exc:
            raise ParseError(f"bad number in core term {m.group(0)!r}") from exc
        if kind == "poly":
            if not vals:
                raise ParseError("poly() needs at least one coefficient")
            terms.append(PolyTerm(tuple(vals)))
        else:
            if len(vals) != 3:
                raise ParseError("gauss() takes (center, amp, width)")
            c, a, w = vals
            if w <= 0:
                raise ParseError("gauss width must be positive")
            terms.append(GaussTerm(c, a, w))
    # everything outside the matches must be '+' separators / whitespace
    leftover = text
    for s, e in reversed(consumed):
        leftover = leftover[:s] + leftover[e:]
    if leftover.strip().strip("+").strip() and not all(
            ch in "+ \t" for ch in leftover.strip()):
        raise ParseError(f"unrecognized core syntax near {leftover.strip()!r}")
    if not terms:
        raise ParseError("core must contain at least one poly() or gauss() term")
    return tuple(terms)


def _parse_kv(text: str) -> dict:
    """Key-value lines, optionally wrapped in an INI [potential] section."""
    import configparser

    if "[potential]" not in text:
        text = "[potential]\n" + text
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ParseError(f"config does not parse: {exc}") from exc
    return dict(cp["potential"])


def _bridge_coeffs(f0, d0, s0, f1, d1, s1):
    """Quintic p(u) on [0,1] with p,p',p'' = (f0,d0,s0) at 0, (f1,d1,s1) at 1.

    The left-end data pins a0..a2 directly; the right end leaves a 3x3 system
    for a3..a5 whose matrix is the fixed Vandermonde-derivative block.
    """
    a0, a1, a2 = f0, d0, 0.5 * s0
    M = np.array([[1.0, 1.0, 1.0],
                  [3.0, 4.0, 5.0],
                  [6.0, 12.0, 20.0]])
    rhs = np.array([f1 - (a0 + a1 + a2),
                    d1 - (a1 + 2.0 * a2),
                    s1 - 2.0 * a2])
    a3, a4, a5 = np.linalg.solve(M, rhs)
    return (a0, a1, a2, a3, a4, a5)


def build_potential(spec_text: str) -> PotentialSpec:
    """Construct a PotentialSpec from config text and validate it.

    Raises ParseError on grammar problems, InvalidPotential on structural
    ones (tail exponent outside (0,1), no confinement, glue infeasible).
    """
    kv = _parse_kv(spec_text)
    dimension = int(kv.get("dimension", "1"))
    if dimension not in (1, 3):
        raise InvalidPotential(f"dimension must be 1 or 3, got {dimension}")
    if "core" not in kv:
        raise ParseError("missing 'core' key")
    core = _parse_core(kv["core"])
    beta0 = float(kv.get("beta0", DEFAULT_BETA0))

    tail_a = kv.get("tail.a")
    tail_coeff = kv.get("tail.coeff")
    glue_radius = kv.get("glue_radius", "inf")
    if (tail_a is None) != (tail_coeff is None):
        raise ParseError("tail.a and tail.coeff must be given together")

    if tail_a is None:
        spec = PotentialSpec(dimension, core, None, None, math.inf,
                             beta0=beta0)
    else:
        a = float(tail_a)
        t = float(tail_coeff)
        Rg = float(glue_radius)
        if not (0.0 < a < 1.0):
            raise InvalidPotential(f"tail exponent a={a} outside (0, 1)")
        if t <= 0:
            raise InvalidPotential("tail coefficient must be positive")
        if not (math.isfinite(Rg) and Rg > 0):
            raise InvalidPotential("tail spec needs a finite glue_radius > 0")
        glue = _solve_glue(core, a, t, Rg)
        spec = PotentialSpec(dimension, core, a, t, Rg, glue, beta0)

    _validate_spec(spec)
    return spec


def _core_f(core_terms, x):
    out = sum(term.f(x) for term in core_terms)
    return out


def _core_f1(core_terms, x):
    return sum(term.f1(x) for term in core_terms)


def _core_f2(core_terms, x):
    return sum(term.f2(x) for term in core_terms)


def _solve_glue(core, a, t, Rg):
    """One quintic bridge per side, matching core at +-Rg, tail at Rg+1."""
    r1 = Rg + 1.0
    ft, dt, st = t * r1**a, t * a * r1**(a - 1), t * a * (a - 1) * r1**(a - 2)
    sides = []
    for sgn in (-1.0, +1.0):
        x0 = sgn * Rg
        # left-end data in the outward variable u = |x| - Rg
        f0 = _core_f(core, x0)
        d0 = sgn * _core_f1(core, x0)
        s0 = _core_f2(core, x0)
        sides.append(_bridge_coeffs(f0, d0, s0, ft, dt, st))
    left, right = sides
    return (tuple(left), tuple(right))


def _validate_spec(spec: PotentialSpec) -> None:
    # two-sided continuity at the glue seams, via the public evaluator so the
    # chain-rule signs are covered too; one-sided limits are Richardson
    # extrapolated (2 v(d) - v(2d)) because the bridge has O(100) third
    # derivatives and a raw offset comparison would see those, not the seam
    if spec.has_tail:
        for seam in (spec.glue_radius, spec.glue_radius + 1.0):
            for sgn in (-1.0, 1.0) if spec.dimension == 1 else (1.0,):
                x = sgn * seam
                d = 1e-7 * seam * sgn

                def limit(side):
                    v1 = eval_potential(spec, x + side * d, 1.0)
                    v2 = eval_potential(spec, x + 2.0 * side * d, 1.0)
                    return [2.0 * float(a) - float(b) for a, b in
                            ((v1.F, v2.F), (v1.gradF, v2.gradF),
                             (v1.laplF, v2.laplF))]

                for a, b in zip(limit(-1.0), limit(+1.0)):
                    if abs(a - b) > 1e-8 * (1.0 + abs(a)):
                        raise InvalidPotential(
                            f"glue not C^2 at |x|={seam}: {a} vs {b}")

    # confinement / finitely many minima, by grid scan
    if spec.has_tail:
        X = spec.glue_radius + 2.0
    else:
        widths = [t.width for t in spec.core_terms if isinstance(t, GaussTerm)]
        centers = [abs(t.center) for t in spec.core_terms
                   if isinstance(t, GaussTerm)]
        X = 10.0 + max(centers + [0.0]) + 3.0 * max(widths + [0.0])
    lo = 0.0 if spec.dimension == 3 else -X
    xs = np.linspace(lo, X, 4001)
    pv = eval_potential(spec, xs, 1.0)
    Fm = float(np.min(pv.F))
    if not spec.has_tail:
        # a confining core must actually grow outward; in the radial case the
        # inner end is r = 0, which is a boundary, not an escape direction
        inner_ok = spec.dimension == 3 or (pv.gradF[0] < 0
                                           and pv.F[0] > Fm + 0.5)
        if not (pv.gradF[-1] > 0 and pv.F[-1] > Fm + 0.5 and inner_ok):
            raise InvalidPotential("core is not confining and no tail given")
    sign = np.sign(pv.gradF)
    flips = np.nonzero(np.diff(sign) != 0)[0]
    if len(flips) > 64:
        raise InvalidPotential("F' changes sign too often; not finitely many "
                               "minima at this resolution")


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _eval_F(spec: PotentialSpec, x):
    """F, F', F'' at real x (scalar or array), piecewise across the glue."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if not spec.has_tail:
        F = _core_f(spec.core_terms, x)
        F1 = _core_f1(spec.core_terms, x)
        F2 = _core_f2(spec.core_terms, x)
    else:
        Rg = spec.glue_radius
        ax = np.abs(x)
        sgn = np.where(x >= 0, 1.0, -1.0)
        F = np.empty_like(x)
        F1 = np.empty_like(x)
        F2 = np.empty_like(x)

        m_core = ax <= Rg
        m_tail = ax >= Rg + 1.0
        m_bridge = ~(m_core | m_tail)

        if m_core.any():
            xc = x[m_core]
            F[m_core] = _core_f(spec.core_terms, xc)
            F1[m_core] = _core_f1(spec.core_terms, xc)
            F2[m_core] = _core_f2(spec.core_terms, xc)
        if m_tail.any():
            t, a = spec.tail_coeff, spec.tail_a
            r = ax[m_tail]
            F[m_tail] = t * r**a
            F1[m_tail] = sgn[m_tail] * t * a * r**(a - 1)
            F2[m_tail] = t * a * (a - 1) * r**(a - 2)
        if m_bridge.any():
            u = ax[m_bridge] - Rg
            s = sgn[m_bridge]
            neg = s < 0
            cl = np.asarray(spec.glue_coeffs[0])
            cr = np.asarray(spec.glue_coeffs[1])
            for which, coeffs in ((neg, cl), (~neg, cr)):
                if which.any():
                    uu = u[which]
                    idx = np.nonzero(m_bridge)[0][which]
                    F[idx] = P.polyval(uu, coeffs)
                    F1[idx] = s[which] * P.polyval(uu, P.polyder(coeffs))
                    F2[idx] = P.polyval(uu, P.polyder(coeffs, 2))
    if scalar:
        return float(F[0]), float(F1[0]), float(F2[0])
    return F, F1, F2


def eval_potential(spec: PotentialSpec, x, eps: float) -> PotentialValues:
    """F, grad F, Lap F, V and V_eps at x (broadcast over arrays).

    In 3D the argument is the radius and Lap F = F'' + 2 F'/r (the r = 0
    singleton is handled by the smooth limit 3 F''(0)).
    """
    F, F1, F2 = _eval_F(spec, x)
    if spec.dimension == 3:
        r = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            lap = np.where(r != 0.0, F2 + 2.0 * F1 / np.where(r == 0, 1, r),
                           3.0 * F2)
        lap = float(lap) if np.ndim(x) == 0 else lap
    else:
        lap = F2
    V = 0.25 * np.square(F1)
    V_eps = V - 0.5 * eps * lap
    return PotentialValues(F=F, gradF=F1, laplF=lap, V=V, V_eps=V_eps)


def _tail_V_eps_complex(spec: PotentialSpec, z, eps: float):
    """V_eps of the tail closed form at complex radius z."""
    t, a = spec.tail_coeff, spec.tail_a
    F1 = t * a * z**(a - 1)
    F2 = t * a * (a - 1) * z**(a - 2)
    lap = F2 + 2.0 * F1 / z if spec.dimension == 3 else F2
    return 0.25 * F1 * F1 - 0.5 * eps * lap


def _core_V_eps_complex(spec: PotentialSpec, z, eps: float):
    """V_eps of an entire (tail-free) core at complex argument z."""
    F1 = _core_f1(spec.core_terms, z)
    F2 = _core_f2(spec.core_terms, z)
    lap = F2 + 2.0 * F1 / z if spec.dimension == 3 else F2
    return 0.25 * F1 * F1 - 0.5 * eps * lap


def eval_V_rotated(spec: PotentialSpec, r, beta: float, r0: float,
                   eps: float = 0.0):
    """V_eps along the scaled ray r0 + (r - r0) e^{i beta}, r >= r0.

    With the default eps = 0 this is the rotated V.  Tail specs continue the
    tail closed form only (the contour never reaches the core: r0 must sit
    beyond the bridge); tail-free confining specs continue the entire core.
    """
    if abs(beta) > spec.beta0 + 1e-15:
        raise OutsideAnalyticityCone(
            f"beta={beta} exceeds analyticity half-angle {spec.beta0}")
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < r0 - 1e-12 * max(1.0, abs(r0))):
        raise InsideCore(f"r={r} below contour radius r0={r0}")
    if spec.has_tail and r0 < spec.glue_radius + 1.0 - 1e-12:
        raise InsideCore(
            f"r0={r0} inside the glue region; continuation starts at "
            f"{spec.glue_radius + 1.0}")
    z = r0 + (r_arr - r0) * complex(math.cos(beta), math.sin(beta))
    if spec.has_tail:
        out = _tail_V_eps_complex(spec, z, eps)
    else:
        out = _core_V_eps_complex(spec, z, eps)
    if np.ndim(r) == 0:
        return complex(out)
    return out


# ---------------------------------------------------------------------------
# tail hypotheses
# ---------------------------------------------------------------------------

def fit_tail_samples(r, V, dVdr=None, beta0: float = DEFAULT_BETA0
                     ) -> HypothesisReport:
    """Log-log fit of sampled tail values; the engine behind verify_hypotheses.

    Exposed separately so synthetic decay laws (gamma outside the admissible
    range, non-power shapes) can be pushed through the same code path.
    """
    r = np.asarray(r, dtype=float)
    V = np.asarray(V, dtype=float)
    if r.size < 20:
        raise FitFailed("need at least 20 sample points")
    if np.any(V <= 0):
        raise FitFailed("V vanishes on the fit range")
    if np.any(np.diff(V) >= 0):
        raise FitFailed("tail is not strictly decreasing on the fit range")
    lr, lv = np.log(r), np.log(V)
    A = np.vstack([lr, np.ones_like(lr)]).T
    sol, res, _, _ = np.linalg.lstsq(A, lv, rcond=None)
    gamma_fit = -float(sol[0])
    fit_residual = float(np.sqrt(res[0] / r.size)) if res.size else 0.0
    scaled = V * r**gamma_fit
    c_V, C_V = float(np.min(scaled)), float(np.max(scaled))
    if dVdr is not None:
        dVdr = np.asarray(dVdr, dtype=float)
        nontrap_min = float(np.min(np.abs(dVdr) / V)) / c_V
        drg = float(np.max(np.abs(dVdr) * r**gamma_fit)) / C_V
        drg1 = float(np.max(np.abs(dVdr) * r**(gamma_fit + 1.0))) / C_V
    else:
        nontrap_min = float("nan")
        drg = drg1 = float("nan")
    passed = (c_V <= C_V) and (0.0 < gamma_fit < 2.0)
    return HypothesisReport(gamma_fit=gamma_fit, c_V=c_V, C_V=C_V,
                            nontrap_min=nontrap_min, beta0=beta0,
                            passed=passed, fit_residual=fit_residual,
                            deriv_ratio_gamma=drg, deriv_ratio_gamma1=drg1)


def verify_hypotheses(spec: PotentialSpec, r_range, eps_list
                      ) -> HypothesisReport:
    """Fit the tail of V over r_range and check the decay-law requirements.

    r_range must lie beyond the glue; V_eps positivity on the range is also
    checked for every eps in eps_list (the eps correction must not flip the
    sign of the tail at the scales we actually run).
    """
    if not spec.has_tail:
        raise FitFailed("confining spec has no tail to verify")
    r_lo, r_hi = float(r_range[0]), float(r_range[1])
    if r_lo < spec.glue_radius + 1.0:
        raise FitFailed(f"fit range must start beyond {spec.glue_radius + 1.0}")
    r = np.geomspace(r_lo, r_hi, 200)
    pv = eval_potential(spec, r, 0.0)
    dVdr = 0.5 * pv.gradF * pv.laplF  # V = F'^2/4 so V' = F' F''/2
    report = fit_tail_samples(r, pv.V, dVdr, beta0=spec.beta0)
    ok = report.passed
    for eps in eps_list:
        veps = eval_potential(spec, r, float(eps)).V_eps
        if np.any(veps <= 0):
            ok = False
    if ok != report.passed:
        report = dataclasses.replace(report, passed=ok)
    return report


def scaling_radius(report: HypothesisReport, eps: float) -> float:
    """(c_V / eps)^(1/gamma): where the tail has decayed to scale eps."""
    if not report.passed:
        raise HypothesesNotVerified("tail checks did not pass")
    if eps <= 0:
        raise HypothesesNotVerified(f"eps must be positive, got {eps}")
    return (report.c_V / eps) ** (1.0 / report.gamma_fit)
