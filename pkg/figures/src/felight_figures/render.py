"""Render felight run directories into figure panels.

Usage: felight-render --in RUNDIR --out FIGDIR [--only fig2,fig5]

Each recipe validates its inputs, draws one PNG and records the input
checksums in manifest.json.  Missing inputs mark the figure as skipped and
the exit code nonzero, but other figures still render.
"""

from __future__ import annotations

import argparse
import glob
import hashlib
import json
import math
import os
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .recipes import DEFAULT_RECIPES, FigureRecipe  # noqa: E402
from .schema import SchemaError, load_table, pivot  # noqa: E402

GREY = "0.75"


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _resolve(in_dir: str, pattern: str) -> list[str]:
    hits = sorted(glob.glob(os.path.join(in_dir, pattern)))
    return hits


def _heat(ax, xs, ys, grid, cmap, label, diverging=False, mask_grey=True):
    data = np.ma.masked_invalid(grid)
    cm = plt.get_cmap(cmap).copy()
    if mask_grey:
        cm.set_bad(GREY)
    if diverging:
        vmax = float(np.abs(data).max()) or 1.0
        kw = {"vmin": -vmax, "vmax": vmax}
    else:
        kw = {}
    im = ax.imshow(data, origin="lower", aspect="auto", cmap=cm,
                   extent=(xs[0], xs[-1], ys[0], ys[-1]), **kw)
    ax.figure.colorbar(im, ax=ax, label=label, fraction=0.046)
    return im


def render_heatmap(ax, table, xcol, ycol, vcol, cmap="viridis", label="",
                   diverging=False):
    """Draw one pivoted scan as a heatmap; nan cells come out grey."""
    xs, ys, grid = pivot(table, xcol, ycol, vcol)
    _heat(ax, xs, ys, grid, cmap, label, diverging=diverging)
    ax.set_xlabel(xcol)
    ax.set_ylabel(ycol)


def _wigner_panel(ax, table, title):
    xs, ys, grid = pivot(table, "x", "p", "w")
    _heat(ax, xs, ys, grid, "RdBu_r", "W", diverging=True, mask_grey=False)
    ax.set_xlabel("x")
    ax.set_ylabel("p")
    ax.set_title(title, fontsize=9)


def _fig2(paths, out_path):
    post = load_table(paths["post_scan"][0], "emit_postfilter")
    pre = load_table(paths["pre_scan"][0], "emit_prefilter")
    wigs = paths["post_wigner"] + paths["pre_wigner"]
    n_wig = max(1, len(wigs))
    cols = 2 * n_wig
    fig = plt.figure(figsize=(3.2 * max(4, n_wig), 7.5))
    gs = fig.add_gridspec(3, cols)
    ax = fig.add_subplot(gs[0, : cols // 2])
    ax.semilogx(post.col("delta_d"), post.col("purity"), "k-")
    ax.set_xlabel("post-filter half width")
    ax.set_ylabel("purity")
    ax = fig.add_subplot(gs[0, cols // 2:])
    ax.semilogx(post.col("delta_d"), post.col("field_abs"), "b-")
    ax.set_xlabel("post-filter half width")
    ax.set_ylabel("|<a>|")
    ax = fig.add_subplot(gs[1, : cols // 2])
    if np.unique(pre.col("beta_abs")).size > 1:
        xs, ys, grid = pivot(pre, "delta_d", "beta_abs", "purity")
        _heat(ax, xs, ys, grid, "magma", "purity")
        ax.set_xlabel("pre-filter width")
        ax.set_ylabel("|beta|")
    else:
        ax.semilogx(pre.col("delta_d"), pre.col("purity"), "k-")
        ax.set_xlabel("pre-filter width")
        ax.set_ylabel("purity")
    ax = fig.add_subplot(gs[1, cols // 2:])
    ax.semilogx(pre.col("delta_d"), pre.col("field_abs"), "b-")
    ax.set_xlabel("pre-filter width")
    ax.set_ylabel("|<a>|")
    for i, wpath in enumerate(wigs):
        axw = fig.add_subplot(gs[2, 2 * i: 2 * i + 2])
        _wigner_panel(axw, load_table(wpath, "wigner"),
                      os.path.basename(wpath).replace(".csv", ""))
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def _fig3(paths, out_path):
    grid = load_table(paths["grid"][0], "cat")
    wigs = paths["wigner"]
    n_wig = max(1, len(wigs))
    cols = 2 * n_wig
    fig = plt.figure(figsize=(3.2 * max(3, n_wig), 7.0))
    gs = fig.add_gridspec(2, cols)
    ax = fig.add_subplot(gs[0, : cols // 2])
    xs, ys, g = pivot(grid, "s", "beta_abs", "fidelity")
    _heat(ax, xs, ys, g, "inferno", "fidelity")
    ax.set_xlabel("post-selected sideband")
    ax.set_ylabel("|beta|")
    ax = fig.add_subplot(gs[0, cols // 2:])
    xs, ys, g = pivot(grid, "s", "beta_abs", "p_success")
    _heat(ax, xs, ys, np.log10(np.clip(g, 1e-12, None)), "cividis",
          "log10 p_success")
    ax.set_xlabel("post-selected sideband")
    ax.set_ylabel("|beta|")
    for i, wpath in enumerate(wigs):
        axw = fig.add_subplot(gs[1, 2 * i: 2 * i + 2])
        _wigner_panel(axw, load_table(wpath, "wigner"),
                      os.path.basename(wpath).replace(".csv", ""))
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def _fig4(paths, out_path):
    scan = load_table(paths["scan"][0], "optimize")
    wigs = paths.get("wigner", [])
    n_wig = max(1, len(wigs))
    nrows = 2 if wigs else 1
    fig = plt.figure(figsize=(3.4 * max(2, n_wig), 3.4 * nrows))
    gs = fig.add_gridspec(nrows, n_wig)
    ax = fig.add_subplot(gs[0, :])
    ms = np.unique(scan.col("M")).astype(int)
    for m in ms:
        sel = scan.col("M") == m
        order = np.argsort(scan.col("sweep_param")[sel])
        ax.plot(scan.col("sweep_param")[sel][order],
                scan.col("fidelity")[sel][order], "o-", label=f"M={m}")
    ax.set_xlabel("target parameter")
    ax.set_ylabel("best fidelity")
    ax.set_ylim(0, 1.02)
    ax.legend(fontsize=8)
    for i, wpath in enumerate(wigs):
        axw = fig.add_subplot(gs[1, i])
        _wigner_panel(axw, load_table(wpath, "wigner"),
                      os.path.basename(wpath).replace(".csv", ""))
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def _fig5(paths, out_path):
    cfplane = load_table(paths["cfplane"][0], "stats_cfplane")
    iels = load_table(paths["iels"][0], "stats_iels")
    fig, axes = plt.subplots(1, 2, figsize=(9.5, 4.0))
    xs, ys, g = pivot(cfplane, "m2_re", "m1_im", "g_over_i2")
    _heat(axes[0], xs, ys, g, "plasma", "G/I^2")  # nan cells grey
    axes[0].set_xlabel("Re M_2")
    axes[0].set_ylabel("Im M_1")
    xs, ys, g = pivot(iels, "drift", "beta_abs", "g_over_i2")
    _heat(axes[1], xs, ys, g, "plasma", "G/I^2")
    axes[1].set_xlabel("drift")
    axes[1].set_ylabel("|beta|")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def _figs1(paths, out_path):
    fig, axes = plt.subplots(1, 4, figsize=(16.5, 3.6))
    _wigner_panel(axes[0], load_table(paths["electron_wigner"][0], "wigner"),
                  "electron phase space")
    axes[0].set_xlabel("z")
    axes[0].set_ylabel("q")
    for ax, role, beta in ((axes[1], "prefilter_5", 5),
                           (axes[2], "prefilter_10", 10),
                           (axes[3], "prefilter_20", 20)):
        table = load_table(paths[role][0], "cf_prefilter")
        sel = table.col("m") == 1
        sub = table.data[sel]
        cols = table.columns
        from .schema import Table
        sub_t = Table(cols, sub)
        xs, ys, grid = pivot(sub_t, "drift", "delta_d", "abs2")
        _heat(ax, xs, ys, grid, "viridis", "|M_1|^2")
        ax.set_xlabel("drift")
        ax.set_ylabel("window width")
        ax.set_title(f"|beta| = {beta}", fontsize=9)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def _figs2(paths, out_path):
    fig, axes = plt.subplots(2, 3, figsize=(12.5, 6.0))
    for col, role in enumerate(("squeezed", "cat", "tricat")):
        profiles = json.loads(open(paths[role][0], encoding="utf-8").read())
        best = max(profiles, key=lambda p: (p["rings"], p["fidelity"]))
        absv = [b[0] for b in best["betas"]]
        phv = [b[1] for b in best["betas"]]
        rings = np.arange(1, len(absv) + 1)
        axes[0, col].bar(rings, absv, color="tab:blue")
        axes[0, col].set_title(f"{role}: F={best['fidelity']:.3f}, "
                               f"s={best['s']}", fontsize=9)
        axes[0, col].set_ylabel("|beta_i|")
        axes[1, col].bar(rings, phv, color="tab:orange")
        axes[1, col].set_ylabel("phase_i")
        axes[1, col].set_ylim(0, 2 * math.pi)
        axes[1, col].set_xlabel("ring")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


_DRAWERS = {
    "fig2": _fig2,
    "fig3": _fig3,
    "fig4_squeezed": _fig4,
    "fig4_cat": _fig4,
    "fig4_tricat": _fig4,
    "fig5": _fig5,
    "figS1": _figs1,
    "figS2": _figs2,
}


def render_recipe(recipe: FigureRecipe, in_dir: str, out_dir: str) -> dict:
    """Validate, draw and checksum one recipe; returns its manifest entry."""
    entry = {"figure": recipe.name, "output": recipe.output, "inputs": [],
             "missing": [], "status": "ok"}
    paths = {}
    for role, (pattern, kind) in recipe.inputs.items():
        hits = _resolve(in_dir, pattern)
        if not hits:
            if role in recipe.optional:
                paths[role] = []
                continue
            entry["missing"].append(pattern)
            continue
        paths[role] = hits
        for hit in hits:
            if kind != "profiles":
                load_table(hit, kind)  # schema validation
            entry["inputs"].append({"path": os.path.relpath(hit, in_dir),
                                    "sha256": _sha256(hit)})
    if entry["missing"]:
        entry["status"] = "missing inputs"
        return entry
    _DRAWERS[recipe.name](paths, os.path.join(out_dir, recipe.output))
    return entry


def render_all(in_dir: str, out_dir: str, only=None) -> dict:
    """Render every (selected) recipe; manifest.json records the outcome."""
    os.makedirs(out_dir, exist_ok=True)
    wanted = set(only) if only else None
    entries = []
    for recipe in DEFAULT_RECIPES:
        if wanted is not None and recipe.name not in wanted:
            continue
        try:
            entries.append(render_recipe(recipe, in_dir, out_dir))
        except SchemaError as exc:
            entries.append({"figure": recipe.name, "output": recipe.output,
                            "inputs": [], "missing": [str(exc)],
                            "status": "schema error"})
    manifest = {"in_dir": os.path.abspath(in_dir), "figures": entries,
                "ok": all(e["status"] == "ok" for e in entries)
                      and bool(entries)}
    with open(os.path.join(out_dir, "manifest.json"), "w",
              encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return manifest


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(prog="felight-render")
    parser.add_argument("--in", dest="in_dir", required=True)
    parser.add_argument("--out", dest="out_dir", required=True)
    parser.add_argument("--only", default=None,
                        help="comma-separated figure names")
    args = parser.parse_args(argv)
    only = args.only.split(",") if args.only else None
    manifest = render_all(args.in_dir, args.out_dir, only=only)
    for entry in manifest["figures"]:
        print(f"{entry['figure']}: {entry['status']}", file=sys.stderr)
    sys.exit(0 if manifest["ok"] else 1)


if __name__ == "__main__":
    main()
