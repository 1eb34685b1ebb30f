"""Turn a figure bundle into a plot.

A bundle is a JSON manifest naming one CSV file per series, all following the
`snr_db,metric,value,ci_low,ci_high,scenario` schema.  Line charts plot value
against SNR (optionally with a shaded confidence band); bar charts group
values by the scenario column.  Inputs are never mutated, and rendering is
deterministic: the same bundle produces byte-identical SVG output.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["PlotSpec", "RenderError", "build_figure", "build_plot_spec", "render"]

# deterministic style cycle; entries are reused in order if a bundle has more
# series than listed here
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#e377c2", "#7f7f7f", "#17becf", "#bcbd22")
_MARKERS = ("o", "s", "^", "v", "D", "x", "+", "*", "<", ">")


class RenderError(RuntimeError):
    """A bundle cannot be rendered; the message names the offending series."""


@dataclass(frozen=True)
class SeriesData:
    name: str
    snr_db: tuple[float, ...]
    value: tuple[float, ...]
    ci_low: tuple[float | None, ...]
    ci_high: tuple[float | None, ...]
    scenario: tuple[str, ...]


@dataclass(frozen=True)
class PlotSpec:
    """Everything needed to draw one bundle."""

    manifest: dict
    series_data: tuple[SeriesData, ...]
    styles: dict  # keyed by series name
    out_path: str
    image_format: str


def _read_series(path: str, name: str) -> SeriesData:
    if not os.path.exists(path):
        raise RenderError(f"series {name!r}: data file {path} is missing")
    snr, val, lo, hi, scen = [], [], [], [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            snr.append(float(row["snr_db"]))
            val.append(float(row["value"]))
            lo.append(float(row["ci_low"]) if row["ci_low"] else None)
            hi.append(float(row["ci_high"]) if row["ci_high"] else None)
            scen.append(row["scenario"])
    if not snr:
        raise RenderError(f"series {name!r}: data file {path} has no rows")
    return SeriesData(
        name=name, snr_db=tuple(snr), value=tuple(val),
        ci_low=tuple(lo), ci_high=tuple(hi), scenario=tuple(scen),
    )


def build_plot_spec(manifest_path: str, out_path: str, image_format: str = "svg") -> PlotSpec:
    """Load a manifest, read every series, and assign each one a style."""
    if image_format not in ("svg", "png"):
        raise RenderError(f"unsupported output format: {image_format!r}")
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    base = os.path.dirname(os.path.abspath(manifest_path))
    data = []
    styles = {}
    for i, entry in enumerate(manifest.get("series", [])):
        name = entry["name"]
        data.append(_read_series(os.path.join(base, entry["csv"]), name))
        styles[name] = {
            "color": _COLORS[i % len(_COLORS)],
            "marker": _MARKERS[i % len(_MARKERS)],
        }
    if not data:
        raise RenderError("manifest lists no series")
    for entry in manifest["series"]:
        if entry["name"] not in styles:  # every series must carry a style
            raise RenderError(f"series {entry['name']!r} has no style entry")
    return PlotSpec(
        manifest=manifest, series_data=tuple(data), styles=styles,
        out_path=out_path, image_format=image_format,
    )


def _draw_lines(ax, spec: PlotSpec) -> None:
    for series in spec.series_data:
        style = spec.styles[series.name]
        ax.plot(
            series.snr_db, series.value,
            color=style["color"], marker=style["marker"],
            markersize=4, linewidth=1.3, label=series.name,
        )
        has_ci = all(v is not None for v in series.ci_low)
        if has_ci:
            ax.fill_between(
                series.snr_db, series.ci_low, series.ci_high,
                color=style["color"], alpha=0.2, linewidth=0,
            )


def _draw_bars(ax, spec: PlotSpec) -> None:
    categories = list(dict.fromkeys(
        c for series in spec.series_data for c in series.scenario
    ))
    width = 0.8 / len(spec.series_data)
    for i, series in enumerate(spec.series_data):
        by_cat = dict(zip(series.scenario, series.value))
        xs = [j + (i - (len(spec.series_data) - 1) / 2) * width
              for j in range(len(categories))]
        ax.bar(
            xs, [by_cat.get(c, 0.0) for c in categories], width=width,
            color=spec.styles[series.name]["color"], label=series.name,
        )
    ax.set_xticks(range(len(categories)))
    ax.set_xticklabels(categories)


def build_figure(spec: PlotSpec):
    """Draw the bundle onto a fresh matplotlib figure."""
    fig, ax = plt.subplots(figsize=(6.4, 4.8), dpi=100)
    manifest = spec.manifest
    if manifest.get("chart") == "bar":
        _draw_bars(ax, spec)
    else:
        _draw_lines(ax, spec)
        if manifest.get("y_scale") == "log":
            ax.set_yscale("log")
    ax.set_xlabel(manifest.get("x_label", ""))
    ax.set_ylabel(manifest.get("y_label", ""))
    ax.set_title(manifest.get("title", ""), fontsize=10)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def render(manifest_path: str, out_path: str, image_format: str = "svg") -> str:
    """Render one bundle to ``out_path``; returns the written path."""
    spec = build_plot_spec(manifest_path, out_path, image_format)
    # fixed hash salt and stripped date keep SVG output byte-stable
    with matplotlib.rc_context({"svg.hashsalt": "ngssk-render"}):
        fig = build_figure(spec)
        try:
            if image_format == "svg":
                fig.savefig(out_path, format="svg", metadata={"Date": None})
            else:
                fig.savefig(out_path, format="png")
        finally:
            plt.close(fig)
    return out_path
