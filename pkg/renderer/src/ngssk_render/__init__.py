"""Render ngssk figure bundles (CSV series + JSON manifest) to SVG or PNG."""

from ngssk_render.render import PlotSpec, RenderError, build_figure, build_plot_spec, render

__all__ = ["PlotSpec", "RenderError", "build_figure", "build_plot_spec", "render"]

__version__ = "0.1.0"
