"""Command line front end.

Exit codes: 0 success, 2 configuration problem, 3 some eps values failed,
4 every eps value failed (or a single-shot command failed numerically).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import (
    InvalidPotential,
    IoError,
    OutsideAnalyticityCone,
    ParseError,
    ReslabError,
)
from .operators import ScalingContour
from .pipeline import (
    RunRecord,
    _fit_depth_full,
    emit_report,
    extrapolate_lambda,
    interior_stage,
    load_config,
    run_sweep,
    wells_domain_for,
)
from .potential import verify_hypotheses
from .solvers import find_resonances
from .symbols import lower_bound_scan, non_trapping_scan, taylor_remainder_scan
from .wells import well_structure

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARTIAL = 3
EXIT_ALLFAIL = 4

_CONFIG_ERRORS = (ParseError, InvalidPotential, IoError)


def _parse_eps_list(text):
    try:
        vals = tuple(float(t) for t in text.replace(",", " ").split())
    except ValueError:
        raise ParseError(f"bad --eps list {text!r}")
    if not vals or any(v <= 0 for v in vals):
        raise ParseError("--eps values must be positive")
    return tuple(sorted(set(vals), reverse=True))


def _load(args):
    cfg = load_config(args.config)
    if getattr(args, "eps", None):
        cfg.eps_list = _parse_eps_list(args.eps)
    if getattr(args, "beta", None) is not None:
        if abs(args.beta) > cfg.spec.beta0:
            raise ParseError(f"--beta {args.beta} outside the analyticity "
                             f"cone {cfg.spec.beta0}")
        cfg.beta = args.beta
    if getattr(args, "mode", None):
        if args.mode == "smooth" and cfg.w <= 0:
            raise ParseError("smooth contour needs w > 0 in the config")
        cfg.mode = args.mode
    if getattr(args, "check_truncation", False):
        cfg.check_truncation = True
    return cfg


def _report_for(cfg):
    spec = cfg.spec
    if not spec.has_tail:
        return None
    return verify_hypotheses(spec, (spec.glue_radius + 2.0, 1e4),
                             cfg.eps_list)


def cmd_wells(args) -> int:
    cfg = _load(args)
    try:
        ws = well_structure(cfg.spec, wells_domain_for(cfg),
                            cfg.n_grid_wells)
    except ReslabError as exc:
        print(f"wells: {exc}", file=sys.stderr)
        return EXIT_ALLFAIL
    print(f"{'well':>4}  {'x':>18}  {'F(x)':>18}  {'depth':>18}")
    for i, (x, f) in enumerate(ws.minima):
        depth = "inf" if i == 0 else f"{ws.depths[i - 1]:.12g}"
        print(f"{i:>4}  {x:>18.12g}  {f:>18.12g}  {depth:>18}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "wells.json").write_text(json.dumps(ws.to_dict(), indent=2))
    return EXIT_OK


def _per_eps_loop(cfg, worker):
    """Run worker(eps, report) per eps; return (ok_count, fail_count)."""
    try:
        report = _report_for(cfg)
    except ReslabError as exc:
        print(f"hypothesis checks failed: {exc}", file=sys.stderr)
        return 0, len(cfg.eps_list)
    ok = fail = 0
    for eps in cfg.eps_list:
        try:
            worker(eps, report)
            ok += 1
        except ReslabError as exc:
            print(f"eps={eps}: {type(exc).__name__}: {exc}", file=sys.stderr)
            fail += 1
    return ok, fail


def _exit_for(ok, fail) -> int:
    if fail == 0:
        return EXIT_OK
    return EXIT_PARTIAL if ok > 0 else EXIT_ALLFAIL


def cmd_interior_spectrum(args) -> int:
    cfg = _load(args)
    rows = []

    def worker(eps, report):
        plan, _, sr, floor = interior_stage(cfg, eps, report)
        for i, (lam, res) in enumerate(zip(sr.eigenvalues, sr.residuals)):
            rows.append((eps, i, float(lam), float(res)))
            note = "" if lam >= floor else "  (below floor)"
            print(f"eps={eps:<8g} n={i}  lambda={lam: .12e}  "
                  f"residual={res:.2e}{note}")

    ok, fail = _per_eps_loop(cfg, worker)
    if args.out and rows:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "spectra.csv", "w") as fh:
            fh.write("eps,index,lambda,residual\n")
            fh.writelines(f"{e},{i},{l!r},{r!r}\n" for e, i, l, r in rows)
    return _exit_for(ok, fail)


def cmd_resonances(args) -> int:
    cfg = _load(args)
    rows = []

    def worker(eps, report):
        if report is None:
            raise InvalidPotential("resonances need a spec with a tail")
        plan, _, sr, floor = interior_stage(cfg, eps, report)
        seeds = [float(l) for l in sr.eigenvalues if l >= floor]
        if not seeds:
            print(f"eps={eps:g}: all interior eigenvalues below the "
                  f"credibility floor, nothing to seed")
            return
        contour = ScalingContour(plan.r0, cfg.beta, cfg.mode, cfg.w)
        res, fails = find_resonances(
            cfg.spec, eps, contour, seeds,
            {"N": plan.N_full, "R_max": plan.R_max, "tol": cfg.tol,
             "max_iter": cfg.max_iter, "beta_step": cfg.beta_step,
             "check_truncation": cfg.check_truncation})
        for r in res:
            rows.append((eps, r))
            print(f"eps={eps:<8g} seed={r.seed:.6e}  "
                  f"mu={r.mu.real: .12e}{r.mu.imag:+.6e}j  "
                  f"theta_drift={r.theta_drift:.2e}  "
                  f"grid_drift={r.grid_drift:.2e}  it={r.iterations}")
        for f in fails:
            print(f"eps={eps:<8g} seed={f['seed']:.6e}  FAILED: "
                  f"{f['reason']}", file=sys.stderr)

    ok, fail = _per_eps_loop(cfg, worker)
    if args.out and rows:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "resonances.csv", "w") as fh:
            fh.write("eps,index,lambda_seed,re_mu,im_mu,theta_drift,"
                     "grid_drift,iters\n")
            for i, (eps, r) in enumerate(rows):
                fh.write(f"{eps},{i},{r.seed!r},{float(r.mu.real)!r},"
                         f"{float(r.mu.imag)!r},{float(r.theta_drift)!r},"
                         f"{float(r.grid_drift)!r},{r.iterations}\n")
    return _exit_for(ok, fail)


def cmd_symbol_check(args) -> int:
    cfg = _load(args)
    if not cfg.spec.has_tail:
        print("symbol-check needs a spec with a tail", file=sys.stderr)
        return EXIT_CONFIG
    fit_cache = {}

    def fitted_law(report):
        if "fit" not in fit_cache:
            pairs = []
            for e in cfg.eps_list:
                _, _, sr, floor = interior_stage(cfg, e, report)
                if len(sr.eigenvalues) > 1 and sr.eigenvalues[1] >= floor:
                    pairs.append((e, float(sr.eigenvalues[1])))
            d_hat, lnA, _ = _fit_depth_full(pairs)
            fit_cache["fit"] = {"d_hat": d_hat, "ln_prefactor": lnA}
        return fit_cache["fit"]

    def worker(eps, report):
        plan, _, sr, floor = interior_stage(cfg, eps, report)
        if len(sr.eigenvalues) > 1 and sr.eigenvalues[1] >= floor:
            lam, src = float(sr.eigenvalues[1]), "measured"
        else:
            lam, src = extrapolate_lambda(fitted_law(report), eps), \
                "extrapolated"
        part = lower_bound_scan(cfg.spec, eps, cfg.scan_beta, lam,
                                r0=plan.r0)
        nt = non_trapping_scan(cfg.spec, eps, lam, plan.r0)
        t1, t2 = taylor_remainder_scan(cfg.spec, cfg.taylor_betas,
                                       plan.r0, lam)
        print(f"eps={eps:<8g} lambda={lam:.6e} ({src})  "
              f"c_lower={part.c_lower:.6g}  nontrap_min={nt:.6g}  "
              f"taylor_err1={t1:.4g}  taylor_err2={t2:.4g}")
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            path = out / "symbol.csv"
            new = not path.exists()
            with open(path, "a") as fh:
                if new:
                    fh.write("eps,c_lower,nontrap_min,taylor_err1,"
                             "taylor_err2\n")
                fh.write(f"{eps},{part.c_lower!r},{nt!r},{t1!r},{t2!r}\n")

    ok, fail = _per_eps_loop(cfg, worker)
    return _exit_for(ok, fail)


def cmd_sweep(args) -> int:
    cfg = _load(args)
    record = run_sweep(cfg, use_cache=not args.no_cache,
                       cache_dir=args.cache)
    out = args.out or cfg.out_dir
    emit_report(record, out, "all", figures=True)
    n_eps = len(record.per_eps)
    print(f"sweep {record.config_hash[:12]}: {n_eps - record.failed_eps}/"
          f"{n_eps} eps values completed, report in {out}")
    for f in record.depth_fits:
        print(f"  depth law index {f['index']}: d_hat={f['d_hat']:.6g} "
              f"vs d_analysis={f['d_analysis']:.6g} "
              f"(rel_err={f['rel_err']:.3%}, r2={f['r2']:.6f})")
    if record.failed_eps == 0:
        return EXIT_OK
    return EXIT_PARTIAL if record.failed_eps < n_eps else EXIT_ALLFAIL


def cmd_report(args) -> int:
    try:
        record = RunRecord.from_dict(json.loads(Path(args.record).read_text()))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise IoError(f"cannot read record {args.record}: {exc}") from exc
    emit_report(record, args.out, args.format, figures=True)
    print(f"report for {record.config_hash[:12]} written to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reslab",
        description="Resonance and small-eigenvalue experiments for "
                    "semiclassical Schrodinger operators built from a "
                    "drift landscape.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="experiment INI file")
    common.add_argument("--eps", help="override sweep eps values, "
                                      "comma separated")
    common.add_argument("--beta", type=float, help="override contour angle")
    common.add_argument("--mode", choices=("sharp", "smooth"),
                        help="override contour mode")
    common.add_argument("--out", help="directory for data files")
    common.add_argument("--check-truncation", action="store_true",
                        help="fail if the box truncation damping is weak")

    p = sub.add_parser("wells", parents=[common],
                       help="minima and barrier depths of the landscape")
    p.set_defaults(func=cmd_wells)
    p = sub.add_parser("interior-spectrum", parents=[common],
                       help="low interior eigenvalues per eps")
    p.set_defaults(func=cmd_interior_spectrum)
    p = sub.add_parser("resonances", parents=[common],
                       help="complex-scaled resonances seeded from the "
                            "interior spectrum")
    p.set_defaults(func=cmd_resonances)
    p = sub.add_parser("symbol-check", parents=[common],
                       help="symbol lower-bound / non-trapping / Taylor scans")
    p.set_defaults(func=cmd_symbol_check)

    p = sub.add_parser("sweep", parents=[common],
                       help="full eps sweep with cached results and report")
    p.add_argument("--cache", help="cache directory (default: RESLAB_CACHE "
                                   "or ~/.cache/reslab)")
    p.add_argument("--no-cache", action="store_true",
                   help="recompute even if a cached record exists")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="re-emit report files from a "
                                      "record.json")
    p.add_argument("record", help="path to record.json")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--format", default="all",
                   choices=("csv", "json", "svg-data", "all"))
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OutsideAnalyticityCone as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ReslabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ALLFAIL


if __name__ == "__main__":
    sys.exit(main())
