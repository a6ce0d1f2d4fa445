"""Figure recipes: which run-directory files feed which output image.

The input layout is the one produced by the standard desk-scale run (one CLI
invocation per subdirectory, see the repository README).  Paths are relative
to the run directory; a recipe only renders when all its inputs exist.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class FigureRecipe:
    name: str
    inputs: dict          # role -> (relative path or glob, table kind)
    output: str
    optional: tuple = ()  # roles allowed to be absent


DEFAULT_RECIPES = (
    FigureRecipe(
        name="fig2",
        inputs={
            "post_scan": ("fig2_post/emit_scan.csv", "emit_postfilter"),
            "post_wigner": ("fig2_post/emit_wigner_*.csv", "wigner"),
            "pre_scan": ("fig2_pre/emit_scan.csv", "emit_prefilter"),
            "pre_wigner": ("fig2_pre/emit_wigner_*.csv", "wigner"),
        },
        output="fig2.png"),
    FigureRecipe(
        name="fig3",
        inputs={
            "grid": ("fig3/cat_grid.csv", "cat"),
            "wigner": ("fig3/cat_wigner_*.csv", "wigner"),
        },
        output="fig3.png"),
    FigureRecipe(
        name="fig4_squeezed",
        inputs={
            "scan": ("fig4_squeezed/optimize_scan.csv", "optimize"),
            "wigner": ("fig4_squeezed/optimize_wigner_*.csv", "wigner"),
        },
        optional=("wigner",),
        output="fig4_squeezed.png"),
    FigureRecipe(
        name="fig4_cat",
        inputs={
            "scan": ("fig4_cat/optimize_scan.csv", "optimize"),
            "wigner": ("fig4_cat/optimize_wigner_*.csv", "wigner"),
        },
        optional=("wigner",),
        output="fig4_cat.png"),
    FigureRecipe(
        name="fig4_tricat",
        inputs={
            "scan": ("fig4_tricat/optimize_scan.csv", "optimize"),
            "wigner": ("fig4_tricat/optimize_wigner_*.csv", "wigner"),
        },
        optional=("wigner",),
        output="fig4_tricat.png"),
    FigureRecipe(
        name="fig5",
        inputs={
            "cfplane": ("fig5b/stats_grid.csv", "stats_cfplane"),
            "iels": ("fig5c/stats_grid.csv", "stats_iels"),
        },
        output="fig5.png"),
    FigureRecipe(
        name="figS1",
        inputs={
            "electron_wigner": ("figs1a/wigner.csv", "wigner"),
            "prefilter_5": ("figs1b_5/cf_scan.csv", "cf_prefilter"),
            "prefilter_10": ("figs1c_10/cf_scan.csv", "cf_prefilter"),
            "prefilter_20": ("figs1d_20/cf_scan.csv", "cf_prefilter"),
        },
        output="figS1.png"),
    FigureRecipe(
        name="figS2",
        inputs={
            "squeezed": ("fig4_squeezed/profiles.json", "profiles"),
            "cat": ("fig4_cat/profiles.json", "profiles"),
            "tricat": ("fig4_tricat/profiles.json", "profiles"),
        },
        output="figS2.png"),
)
