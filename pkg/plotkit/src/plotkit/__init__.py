"""Static figure generation from phononlaser export files."""

from .figures import FIGURE_KINDS, FigureRequest, render

__all__ = ["FIGURE_KINDS", "FigureRequest", "render"]
