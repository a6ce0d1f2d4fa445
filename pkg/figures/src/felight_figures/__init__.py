"""Figure rendering for felight CLI output directories."""

from .recipes import DEFAULT_RECIPES, FigureRecipe
from .render import render_all, render_heatmap

__version__ = "0.1.0"
