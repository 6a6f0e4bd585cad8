"""Figure rendering for the darkband CSV outputs (no physics recomputed)."""

__version__ = "0.1.0"

from .recipes import FIGURE_IDS, FigureRecipe, recipe_for_directory, render
from .schema import SchemaError, load

__all__ = ["FIGURE_IDS", "FigureRecipe", "recipe_for_directory", "render",
           "SchemaError", "load"]
