"""PNG companions to the report data files, rendered headless."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def _save(fig, path: Path):
    fig.savefig(path, dpi=130, bbox_inches="tight")
    plt.close(fig)
    return path


def _depth_fit_figure(record, out: Path):
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for idx in range(8):
        pts = [(1.0 / e["eps"], math.log(e["lambdas"][idx]))
               for e in record.per_eps
               if "lambdas" in e and len(e["lambdas"]) > idx
               and e["lambdas"][idx] >= e.get("floor", 0.0)
               and e["lambdas"][idx] > 0]
        if not pts:
            continue
        xs, ys = zip(*sorted(pts))
        ax.plot(xs, ys, "o", label=f"ln lambda_{idx}")
    for f in record.depth_fits:
        xs = [1.0 / e["eps"] for e in record.per_eps if "lambdas" in e]
        if not xs:
            continue
        lo, hi = min(xs), max(xs)
        ax.plot([lo, hi],
                [f["ln_prefactor"] - f["d_hat"] * lo,
                 f["ln_prefactor"] - f["d_hat"] * hi],
                "-", label=f"fit {f['index']}: d={f['d_hat']:.4g}")
    ax.set_xlabel("1/eps")
    ax.set_ylabel("ln lambda")
    ax.set_title("eigenvalue depth law")
    if ax.has_data():
        ax.legend(fontsize=8)
    return _save(fig, out / "depth_fit.png")


def _widths_figure(record, out: Path):
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    pts = [(1.0 / e["eps"], abs(r["im_mu"]))
           for e in record.per_eps
           for r in e.get("resonances", []) if r["im_mu"] != 0]
    if pts:
        xs, ys = zip(*sorted(pts))
        ax.semilogy(xs, ys, "s-")
    ax.set_xlabel("1/eps")
    ax.set_ylabel("|Im mu|")
    ax.set_title("resonance widths")
    return _save(fig, out / "widths.png")


def _resonances_figure(record, out: Path):
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    plotted = False
    for e in record.per_eps:
        pts = [(r["re_mu"], r["im_mu"]) for r in e.get("resonances", [])]
        if pts:
            xs, ys = zip(*pts)
            ax.plot(xs, ys, "x", label=f"eps={e['eps']}")
            plotted = True
    ax.axhline(0.0, color="grey", lw=0.6)
    ax.set_xlabel("Re mu")
    ax.set_ylabel("Im mu")
    ax.set_title("resonances in the complex plane")
    if plotted:
        ax.legend(fontsize=8)
    return _save(fig, out / "resonances.png")


def render_figures(record, out_dir):
    """Render the three standard figures; always writes all three files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return [_depth_fit_figure(record, out),
            _widths_figure(record, out),
            _resonances_figure(record, out)]
