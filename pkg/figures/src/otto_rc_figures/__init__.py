"""Render publication-style figures from otto-rc sweep CSV files.

Strictly a CSV consumer: no physics is recomputed here, so the numbers on
every plot trace back to the simulator's own outputs and manifests.
"""

__version__ = "0.1.0"

from .render import FIGURE_IDS, FigureSpec, SchemaError, render  # noqa: F401
