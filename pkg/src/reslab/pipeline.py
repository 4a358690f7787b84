"""Experiment orchestration: configs, eps sweeps, depth fits, cache, reports.

A sweep ties the chain together per eps: scaling radius, grid plan, interior
spectrum, resonances seeded from it, symbol scans wired to the measured
lambda, quasimode and decay diagnostics.  Failures are recorded per eps and
the sweep keeps going; a RunRecord is the JSON-stable result of the whole
run and the unit of caching.
"""

from __future__ import annotations

import configparser
import contextlib
import dataclasses
import datetime
import fcntl
import hashlib
import json
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    InsufficientPoints,
    IoError,
    NonPositiveEigenvalue,
    ParseError,
    ReslabError,
)
from .operators import ScalingContour, assemble_full_scaled, assemble_interior
from .potential import build_potential, scaling_radius, verify_hypotheses
from .solvers import (
    cutoff_profile,
    decay_check,
    find_resonances,
    lowest_eigs,
    quasimode_residual,
)
from .symbols import (
    DEFAULT_SCAN_BETA,
    lower_bound_scan,
    non_trapping_scan,
    taylor_remainder_scan,
)
from .wells import agmon_distance, agmon_field, well_structure

TOOL_VERSION = "0.1.0"

DEFAULT_EPS_LIST = (0.20, 0.175, 0.15, 0.125, 0.10)

#: Eigenvalues below this multiple of roundoff on the row scale are not
#: distinguishable from zero and are excluded from seeding and depth fits.
FLOOR_FACTOR = 30.0

_EPSMACH = float(np.finfo(float).eps)


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    """Everything a sweep needs, parsed from one INI file.

    potential_text is kept in canonical key=value form so that the content
    hash is stable under reordering of the source file.
    """

    potential_text: str
    eps_list: tuple = DEFAULT_EPS_LIST
    k: int = 2
    wells_domain: tuple | None = None
    box: float = 6.0              # half-width used when the spec has no tail
    n_grid_wells: int = 4001
    beta: float = 0.3
    mode: str = "sharp"
    w: float = 0.0
    h_coeff: float = 0.013
    h_power: float = 1.5
    full_factor: float = 0.61
    rmax_multiplier: int = 4
    tol: float = 1e-10
    max_iter: int = 500
    beta_step: float = 0.05
    check_truncation: bool = False
    quasimode: bool = True
    scan_beta: float = DEFAULT_SCAN_BETA
    taylor_betas: tuple = (0.1, 0.2, 0.4)
    out_dir: str = "reslab-out"
    label: str = "run"

    def __post_init__(self):
        self._spec = None

    @property
    def spec(self):
        if self._spec is None:
            self._spec = build_potential(self.potential_text)
        return self._spec

    def to_dict(self) -> dict:
        return {
            "potential_text": self.potential_text,
            "eps_list": list(self.eps_list),
            "k": self.k,
            "wells_domain": (list(self.wells_domain)
                             if self.wells_domain else None),
            "box": self.box,
            "n_grid_wells": self.n_grid_wells,
            "beta": self.beta,
            "mode": self.mode,
            "w": self.w,
            "h_coeff": self.h_coeff,
            "h_power": self.h_power,
            "full_factor": self.full_factor,
            "rmax_multiplier": self.rmax_multiplier,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "beta_step": self.beta_step,
            "check_truncation": self.check_truncation,
            "quasimode": self.quasimode,
            "scan_beta": self.scan_beta,
            "taylor_betas": list(self.taylor_betas),
            "out_dir": self.out_dir,
            "label": self.label,
        }

    def content_hash(self) -> str:
        payload = json.dumps({"config": self.to_dict(),
                              "version": TOOL_VERSION}, sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()


def _floats(text: str) -> tuple:
    try:
        return tuple(float(tok) for tok in text.replace(",", " ").split())
    except ValueError as exc:
        raise ParseError(f"expected a number list, got {text!r}") from exc


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate an INI experiment config; raises ParseError."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ParseError(f"config does not parse: {exc}") from exc
    if "potential" not in cp:
        raise ParseError("config needs a [potential] section")
    potential_text = "\n".join(
        f"{k} = {v}" for k, v in sorted(cp["potential"].items()))
    spec = build_potential(potential_text)

    def get(section, key, default):
        if section in cp and key in cp[section]:
            return cp[section][key]
        return default

    def getf(section, key, default):
        raw = get(section, key, None)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError as exc:
            raise ParseError(f"[{section}] {key}: not a number: {raw!r}") \
                from exc

    def getb(section, key, default):
        raw = get(section, key, None)
        if raw is None:
            return default
        try:
            return cp[section].getboolean(key)
        except ValueError as exc:
            raise ParseError(f"[{section}] {key}: not a boolean: {raw!r}") \
                from exc

    eps_raw = get("sweep", "eps", None)
    eps_list = (_floats(eps_raw) if eps_raw is not None
                else DEFAULT_EPS_LIST)
    eps_list = tuple(sorted(dict.fromkeys(eps_list), reverse=True))
    if not eps_list or any(e <= 0 for e in eps_list):
        raise ParseError("sweep eps values must be positive")

    dom_raw = get("grid", "domain", None)
    wells_domain = None
    if dom_raw is not None:
        dom = _floats(dom_raw)
        if len(dom) != 2 or dom[0] >= dom[1]:
            raise ParseError(f"bad wells domain {dom_raw!r}")
        wells_domain = dom

    cfg = ExperimentConfig(
        potential_text=potential_text,
        eps_list=eps_list,
        k=int(getf("sweep", "k", 2)),
        wells_domain=wells_domain,
        box=getf("grid", "box", 6.0),
        n_grid_wells=int(getf("grid", "n_grid_wells", 4001)),
        beta=getf("contour", "beta", 0.3),
        mode=get("contour", "mode", "sharp"),
        w=getf("contour", "w", 0.0),
        h_coeff=getf("grid", "h_coeff", 0.013),
        h_power=getf("grid", "h_power", 1.5),
        full_factor=getf("grid", "full_factor", 0.61),
        rmax_multiplier=int(getf("grid", "rmax_multiplier", 4)),
        tol=getf("solver", "tol", 1e-10),
        max_iter=int(getf("solver", "max_iter", 500)),
        beta_step=getf("solver", "beta_step", 0.05),
        check_truncation=getb("solver", "check_truncation", False),
        quasimode=getb("sweep", "quasimode", True),
        scan_beta=getf("symbol", "beta", DEFAULT_SCAN_BETA),
        taylor_betas=_floats(get("symbol", "taylor_betas", "0.1 0.2 0.4")),
        out_dir=get("output", "dir", "reslab-out"),
        label=get("output", "label", "run"),
    )
    if cfg.k < 1:
        raise ParseError("sweep k must be at least 1")
    if cfg.mode not in ("sharp", "smooth"):
        raise ParseError(f"contour mode must be sharp or smooth, "
                         f"got {cfg.mode!r}")
    if cfg.mode == "smooth" and cfg.w <= 0:
        raise ParseError("smooth contour needs w > 0")
    if abs(cfg.beta) > spec.beta0:
        raise ParseError(f"contour beta {cfg.beta} outside the analyticity "
                         f"cone {spec.beta0}")
    if cfg.tol <= 0 or cfg.beta_step <= 0 or cfg.h_coeff <= 0:
        raise ParseError("tolerances and grid coefficients must be positive")
    if not (0 < cfg.full_factor <= 1):
        raise ParseError("full_factor must lie in (0, 1]")
    if cfg.rmax_multiplier < 3:
        raise ParseError("rmax_multiplier must be at least 3")
    if cfg.box <= 0 or cfg.n_grid_wells < 100:
        raise ParseError("box must be positive and n_grid_wells >= 100")
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IoError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


# ---------------------------------------------------------------------------
# grid policy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridPlan:
    """Grids anchored so the scaling radius is a shared node.

    The interior box is the target radius rounded up to a whole number of
    steps; the resonance grid is refined by ~1/full_factor with the radius
    kept on a node, so interior and full discretization errors do not cancel
    and the Re(mu)-vs-lambda comparison measures a real h^2 envelope.  The
    quasimode grid reuses the interior spacing exactly, which makes the
    interior eigenvector a subset-embedding with no interpolation error.
    """

    eps: float
    r0: float            # snapped radius, = m * h
    h: float
    m: int
    N_interior: int
    m_full: int
    h_full: float
    N_full: int
    N_quasi: int
    R_max: float
    mult: int

    def to_dict(self) -> dict:
        return {"eps": self.eps, "r0": self.r0, "h": self.h, "m": self.m,
                "N_interior": self.N_interior, "m_full": self.m_full,
                "h_full": self.h_full, "N_full": self.N_full,
                "N_quasi": self.N_quasi, "R_max": self.R_max,
                "mult": self.mult}


def plan_grid(cfg: ExperimentConfig, eps: float, r0_target: float
              ) -> GridPlan:
    h_t = cfg.h_coeff * (5.0 * eps) ** cfg.h_power
    m = max(16, math.ceil(r0_target / h_t))
    r0 = m * h_t
    mult = int(cfg.rmax_multiplier)
    m_f = math.ceil(m / cfg.full_factor)
    return GridPlan(eps=float(eps), r0=r0, h=h_t, m=m,
                    N_interior=2 * m - 1, m_full=m_f, h_full=r0 / m_f,
                    N_full=2 * mult * m_f - 1, N_quasi=2 * mult * m - 1,
                    R_max=mult * r0, mult=mult)


# ---------------------------------------------------------------------------
# depth fitting
# ---------------------------------------------------------------------------

def _fit_depth_full(pairs):
    pts = [(float(e), float(l)) for e, l in pairs]
    if len(pts) < 4:
        raise InsufficientPoints(
            f"depth fit needs at least 4 (eps, lambda) points, got {len(pts)}")
    for _, lam in pts:
        if lam <= 0:
            raise NonPositiveEigenvalue(f"lambda={lam} in depth fit")
    x = np.array([1.0 / e for e, _ in pts])
    y = np.array([math.log(l) for _, l in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return -float(slope), float(intercept), r2


def fit_depth(pairs):
    """Least squares of ln(lambda) against 1/eps -> (d_hat, r_squared)."""
    d_hat, _, r2 = _fit_depth_full(pairs)
    return d_hat, r2


def extrapolate_lambda(depth_fit: dict, eps: float) -> float:
    """Evaluate a fitted exp(-d/eps) law where direct solves hit roundoff."""
    return math.exp(depth_fit["ln_prefactor"] - depth_fit["d_hat"] / eps)


# ---------------------------------------------------------------------------
# the sweep
# ---------------------------------------------------------------------------

_STAGE_ERRORS = (ReslabError, ValueError, FloatingPointError,
                 np.linalg.LinAlgError)


def wells_domain_for(cfg: ExperimentConfig):
    """Search interval for minima: explicit, else core box, else the cutoff."""
    if cfg.wells_domain is not None:
        return cfg.wells_domain
    if cfg.spec.has_tail:
        return (-cfg.spec.glue_radius, cfg.spec.glue_radius)
    return (-cfg.box, cfg.box)


def interior_stage(cfg: ExperimentConfig, eps: float, report=None):
    """Grid plan + interior spectrum + credibility floor for one eps."""
    spec = cfg.spec
    r0_target = scaling_radius(report, eps) if spec.has_tail else cfg.box
    plan = plan_grid(cfg, eps, r0_target)
    op = assemble_interior(spec, eps, plan.r0, plan.N_interior)
    sr = lowest_eigs(op, cfg.k)
    floor = FLOOR_FACTOR * _EPSMACH * op.row_scale()
    return plan, op, sr, floor


def _quasimode_stage(spec, eps, plan, lam, u_int, minima_x):
    lo, hi = 3.4, 4.6
    if plan.r0 < 5.0:
        lo, hi = 0.68 * plan.r0, 0.92 * plan.r0
    op_q = assemble_full_scaled(
        spec, eps, ScalingContour(plan.r0, 0.0, "sharp", 0.0),
        plan.N_quasi, plan.R_max)
    psi = np.zeros(plan.N_quasi)
    j0 = (plan.mult - 1) * plan.m
    psi[j0:j0 + plan.N_interior] = u_int
    psi *= cutoff_profile(op_q.grid.nodes(), lo, hi)
    res = quasimode_residual(op_q, psi, lam)
    d0p = min(agmon_distance(spec, lo, minima_x),
              agmon_distance(spec, -lo, minima_x))
    return {"residual": res,
            "eps_ln_residual": eps * math.log(res) if res > 0 else None,
            "d0_prime": d0p, "chi_lo": lo, "chi_hi": hi}


def _compute_sweep(cfg: ExperimentConfig) -> "RunRecord":
    t_start = time.perf_counter()
    spec = cfg.spec
    has_tail = spec.has_tail

    ws = well_structure(spec, wells_domain_for(cfg), cfg.n_grid_wells)
    minima_x = [x for x, _ in ws.minima]

    hypotheses = {}
    report = None
    if has_tail:
        report = verify_hypotheses(spec, (spec.glue_radius + 2.0, 1e4),
                                   cfg.eps_list)
        hypotheses = dataclasses.asdict(report)

    per_eps = []
    for eps in cfg.eps_list:
        entry = {"eps": float(eps)}
        per_eps.append(entry)
        try:
            plan, op, sr, floor = interior_stage(cfg, eps, report)
            entry["grid"] = plan.to_dict()
            entry["lambdas"] = [float(v) for v in sr.eigenvalues]
            entry["residuals"] = [float(v) for v in sr.residuals]
            entry["floor"] = floor
            seeds, skipped = [], []
            for i, lam in enumerate(sr.eigenvalues):
                if lam >= floor:
                    seeds.append((i, float(lam)))
                else:
                    skipped.append({"index": i, "lambda": float(lam),
                                    "reason": "below credibility floor"})
            entry["skipped_seeds"] = skipped
            entry["_seeds"] = seeds          # stripped before the record
            entry["_plan"] = plan
            entry["_vectors"] = sr.vectors
            entry["_grid_nodes"] = op.grid.nodes()
        except _STAGE_ERRORS as exc:
            entry["error"] = f"{type(exc).__name__}: {exc}"

    # depth laws per eigenvalue index (index 0 is the near-zero ground state
    # and sits below the floor on any double well, so fits start at 1)
    depth_fits = []
    n_depths = len(ws.depths)
    for idx in range(1, cfg.k):
        if idx > n_depths:
            break
        pairs = [(e["eps"], e["lambdas"][idx]) for e in per_eps
                 if "lambdas" in e and len(e["lambdas"]) > idx
                 and e["lambdas"][idx] >= e["floor"]]
        if len(pairs) < 4:
            continue
        try:
            d_hat, lnA, r2 = _fit_depth_full(pairs)
        except (InsufficientPoints, NonPositiveEigenvalue):
            continue
        d_ana = float(ws.depths[idx - 1])
        depth_fits.append({"index": idx, "d_hat": d_hat,
                           "ln_prefactor": lnA, "r2": r2,
                           "d_analysis": d_ana,
                           "rel_err": abs(d_hat - d_ana) / d_ana,
                           "n_points": len(pairs)})
    fit1 = next((f for f in depth_fits if f["index"] == 1), None)

    for entry in per_eps:
        if "error" in entry or "lambdas" not in entry:
            continue
        eps = entry["eps"]
        plan = entry.pop("_plan")
        seeds = entry.pop("_seeds")
        vectors = entry.pop("_vectors")
        nodes = entry.pop("_grid_nodes")

        # the wired spectral parameter is the first excited eigenvalue;
        # when it sits below the floor, fall back to the fitted law
        seed_map = dict(seeds)
        lam_scan, lam_src = None, None
        if 1 in seed_map:
            lam_scan, lam_src = seed_map[1], "measured"
        elif fit1 is not None:
            lam_scan, lam_src = extrapolate_lambda(fit1, eps), "extrapolated"

        if has_tail and seeds:
            try:
                contour = ScalingContour(plan.r0, cfg.beta, cfg.mode, cfg.w)
                res, fails = find_resonances(
                    spec, eps, contour, [lam for _, lam in seeds],
                    {"N": plan.N_full, "R_max": plan.R_max, "tol": cfg.tol,
                     "max_iter": cfg.max_iter, "beta_step": cfg.beta_step,
                     "check_truncation": cfg.check_truncation})
                entry["resonances"] = [r.to_dict() for r in res]
                entry["resonance_failures"] = fails
                entry["s_proxy"] = [
                    eps * math.log(r.seed / abs(r.mu.imag))
                    if r.mu.imag != 0 else None for r in res]
            except _STAGE_ERRORS as exc:
                entry["resonance_error"] = f"{type(exc).__name__}: {exc}"

        if has_tail and lam_scan is not None:
            try:
                part = lower_bound_scan(spec, eps, cfg.scan_beta, lam_scan,
                                        r0=plan.r0)
                nt = non_trapping_scan(spec, eps, lam_scan, plan.r0)
                t1, t2 = taylor_remainder_scan(spec, cfg.taylor_betas,
                                               plan.r0, lam_scan)
                entry["symbol"] = {"c_lower": part.c_lower,
                                   "argmin": part.argmin,
                                   "nontrap_min": nt,
                                   "c_S_used": 1.0 / 12.0,
                                   "taylor_err1": t1, "taylor_err2": t2,
                                   "lambda_used": lam_scan,
                                   "lambda_source": lam_src}
            except _STAGE_ERRORS as exc:
                entry["symbol_error"] = f"{type(exc).__name__}: {exc}"

        # decay and quasimode diagnostics ride on the first excited state
        idx_exc = next((i for i, _ in seeds if i >= 1), None)
        if idx_exc is not None:
            lam1 = entry["lambdas"][idx_exc]
            u1 = vectors[:, idx_exc]
            try:
                fld = agmon_field(spec, nodes, minima_x)
                entry["decay"] = {
                    "sup_defect": decay_check(u1, fld, eps),
                    "eigen_index": idx_exc}
            except _STAGE_ERRORS as exc:
                entry["decay_error"] = f"{type(exc).__name__}: {exc}"
            if cfg.quasimode and has_tail:
                try:
                    entry["quasimode"] = _quasimode_stage(
                        spec, eps, plan, lam1, u1, minima_x)
                except _STAGE_ERRORS as exc:
                    entry["quasimode_error"] = f"{type(exc).__name__}: {exc}"

    failed = sum(1 for e in per_eps if "error" in e)
    return RunRecord(
        config_hash=cfg.content_hash(),
        version=TOOL_VERSION,
        created=datetime.datetime.now(datetime.timezone.utc).isoformat(),
        runtime_s=time.perf_counter() - t_start,
        wells=ws.to_dict(),
        hypotheses=hypotheses,
        per_eps=per_eps,
        depth_fits=depth_fits,
        failed_eps=failed,
    )


@dataclass
class RunRecord:
    """JSON-stable result of one sweep; equality ignores nothing."""

    config_hash: str
    version: str
    created: str
    runtime_s: float
    wells: dict
    hypotheses: dict
    per_eps: list
    depth_fits: list
    failed_eps: int

    def to_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "version": self.version,
            "created": self.created,
            "runtime_s": self.runtime_s,
            "wells": self.wells,
            "hypotheses": self.hypotheses,
            "per_eps": self.per_eps,
            "depth_fits": self.depth_fits,
            "failed_eps": self.failed_eps,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        return cls(**{f.name: d[f.name] for f in dataclasses.fields(cls)})


# ---------------------------------------------------------------------------
# cache
# ---------------------------------------------------------------------------

def _resolve_cache_dir(cache_dir) -> Path:
    if cache_dir is not None:
        return Path(cache_dir)
    env = os.environ.get("RESLAB_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "reslab"


def _cache_load(cdir: Path, key: str):
    path = cdir / f"{key}.json"
    if not path.exists():
        return None
    try:
        return RunRecord.from_dict(json.loads(path.read_text()))
    except (OSError, ValueError, KeyError, TypeError):
        return None   # unreadable entries are treated as misses


@contextlib.contextmanager
def _cache_lock(cdir: Path, key: str):
    lock_path = cdir / f"{key}.lock"
    with open(lock_path, "w") as fh:
        fcntl.flock(fh, fcntl.LOCK_EX)
        try:
            yield
        finally:
            fcntl.flock(fh, fcntl.LOCK_UN)


def _cache_store(cdir: Path, key: str, record: RunRecord) -> None:
    path = cdir / f"{key}.json"
    tmp = cdir / f"{key}.json.tmp"
    tmp.write_text(json.dumps(record.to_dict(), sort_keys=True))
    os.replace(tmp, path)


def run_sweep(config: ExperimentConfig, use_cache: bool = True,
              cache_dir=None) -> RunRecord:
    """Run the sweep, or return the cached record for an identical config."""
    if not use_cache:
        return _compute_sweep(config)
    key = config.content_hash()
    cdir = _resolve_cache_dir(cache_dir)
    cdir.mkdir(parents=True, exist_ok=True)
    hit = _cache_load(cdir, key)
    if hit is not None:
        return hit
    with _cache_lock(cdir, key):
        hit = _cache_load(cdir, key)     # racing writer may have finished
        if hit is not None:
            return hit
        record = _compute_sweep(config)
        _cache_store(cdir, key, record)
    return record


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------

def _write_csv(path: Path, header, rows):
    import csv

    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        wr.writerows(rows)


def _xy_blocks(path: Path, blocks):
    """Gnuplot-style polyline file: '# label' then x y lines, blank between."""
    out = []
    for label, pts in blocks:
        out.append(f"# {label}")
        out.extend(f"{x!r} {y!r}" for x, y in pts)
        out.append("")
    path.write_text("\n".join(out))


def emit_report(record: RunRecord, out_dir, format: str = "all",
                figures: bool = True):
    """Write CSV tables, the record JSON, and plot data under out_dir.

    format selects csv | json | svg-data | all.  With figures=True the
    rendered PNG companions of the svg-data polylines are written as well.
    Returns the list of written paths.
    """
    if format not in ("csv", "json", "svg-data", "all"):
        raise ValueError(f"unknown report format {format!r}")
    out = Path(out_dir)
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        if format in ("csv", "all"):
            rows = [(e["eps"], i, lam, res)
                    for e in record.per_eps if "lambdas" in e
                    for i, (lam, res) in enumerate(zip(e["lambdas"],
                                                       e["residuals"]))]
            p = out / "spectra.csv"
            _write_csv(p, ["eps", "index", "lambda", "residual"], rows)
            written.append(p)

            rows = [(e["eps"], i, r["seed"], r["re_mu"], r["im_mu"],
                     r["theta_drift"], r["grid_drift"], r["iterations"])
                    for e in record.per_eps
                    for i, r in enumerate(e.get("resonances", []))]
            p = out / "resonances.csv"
            _write_csv(p, ["eps", "index", "lambda_seed", "re_mu", "im_mu",
                           "theta_drift", "grid_drift", "iters"], rows)
            written.append(p)

            fits = {f["index"]: f for f in record.depth_fits}
            rows = []
            for i, d in enumerate(record.wells.get("depths", []), start=1):
                f = fits.get(i)
                rows.append((i, d,
                             f["d_hat"] if f else "",
                             f["rel_err"] if f else "",
                             f["r2"] if f else ""))
            p = out / "depths.csv"
            _write_csv(p, ["index", "d_well_analysis", "d_fitted",
                           "rel_err", "r2"], rows)
            written.append(p)

            rows = [(e["eps"], s["c_lower"], s["nontrap_min"],
                     s["taylor_err1"], s["taylor_err2"])
                    for e in record.per_eps
                    for s in ([e["symbol"]] if "symbol" in e else [])]
            p = out / "symbol.csv"
            _write_csv(p, ["eps", "c_lower", "nontrap_min", "taylor_err1",
                           "taylor_err2"], rows)
            written.append(p)

        if format in ("json", "all"):
            p = out / "record.json"
            p.write_text(json.dumps(record.to_dict(), indent=2,
                                    sort_keys=True))
            written.append(p)

        if format in ("svg-data", "all"):
            by_index = {}
            for e in record.per_eps:
                for i, lam in enumerate(e.get("lambdas", [])):
                    if lam > 0 and lam >= e.get("floor", 0.0):
                        by_index.setdefault(i, []).append(
                            (1.0 / e["eps"], math.log(lam)))
            blocks = [(f"ln lambda_{i} vs 1/eps", pts)
                      for i, pts in sorted(by_index.items())]
            for f in record.depth_fits:
                xs = [x for x, _ in by_index.get(f["index"], [])]
                if xs:
                    lo, hi = min(xs), max(xs)
                    blocks.append((
                        f"fit index {f['index']} d_hat={f['d_hat']:.6g}",
                        [(lo, f["ln_prefactor"] - f["d_hat"] * lo),
                         (hi, f["ln_prefactor"] - f["d_hat"] * hi)]))
            p = out / "depth_lambda.xy"
            _xy_blocks(p, blocks)
            written.append(p)

            widths = {}
            for e in record.per_eps:
                for i, r in enumerate(e.get("resonances", [])):
                    if r["im_mu"] != 0:
                        widths.setdefault(i, []).append(
                            (1.0 / e["eps"], math.log(abs(r["im_mu"]))))
            p = out / "widths.xy"
            _xy_blocks(p, [(f"ln|Im mu_{i}| vs 1/eps", pts)
                           for i, pts in sorted(widths.items())])
            written.append(p)

            blocks = []
            for e in record.per_eps:
                pts = [(r["re_mu"], r["im_mu"])
                       for r in e.get("resonances", [])]
                if pts:
                    blocks.append((f"eps={e['eps']}", pts))
            p = out / "resonances_plane.xy"
            _xy_blocks(p, blocks)
            written.append(p)

        if figures:
            from . import plots

            written.extend(plots.render_figures(record, out))
    except OSError as exc:
        raise IoError(f"report emission failed: {exc}") from exc
    return written
