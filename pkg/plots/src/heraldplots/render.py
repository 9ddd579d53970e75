"""Render figures to raster images plus sidecar JSON of the plotted arrays.

The sidecar carries every array exactly as plotted, so regeneration can be
verified by diffing JSON instead of comparing pixels.  Rendering is pure:
identical input tables give byte-identical sidecars.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .figures import FigureData, FigureSpec, Series, build_figure  # noqa: E402

_STYLE = {
    "symbols": dict(marker="o", linestyle="none", markersize=5),
    "reference": dict(marker="s", linestyle="none", markersize=4,
                      markerfacecolor="none"),
    "line": dict(linestyle="-", linewidth=1.2),
    "bound": dict(linestyle="--", linewidth=1.2, color="black"),
}


@dataclass(frozen=True)
class RenderResult:
    figure_id: str
    image_path: str
    sidecar_path: str


def _series_payload(s: Series) -> dict:
    d = {"label": s.label, "role": s.role,
         "x": list(s.x), "y": list(s.y)}
    if s.pair is not None:
        d["pair"] = s.pair
    return d


def sidecar_payload(data: FigureData) -> dict:
    """The exact arrays plotted, in a stable key order."""
    spec = data.spec
    payload = {
        "figure": spec.figure_id,
        "axes": {
            "x": {"label": spec.x.label, "scale": spec.x.scale},
            "y": {"label": spec.y.label, "scale": spec.y.scale},
        },
        "overlay": spec.overlay,
        "series": [_series_payload(s) for s in data.series],
    }
    if spec.y2 is not None:
        payload["axes"]["y2"] = {"label": spec.y2.label,
                                 "scale": spec.y2.scale}
        payload["y2_series"] = [_series_payload(s) for s in data.y2_series]
    if spec.band_below is not None:
        payload["band_below"] = spec.band_below
    if data.notes:
        payload["notes"] = data.notes
    return payload


def _draw(ax, s: Series):
    style = dict(_STYLE[s.role])
    ax.plot(s.x, s.y, label=s.label, **style)


def render(figure, data_dir: str | None = None,
           out_dir: str = ".") -> RenderResult:
    """Build one figure and write <out>/fig_<id>.png and fig_<id>.json.

    Accepts a figure id (with data_dir) or a prebuilt FigureData.  Nothing
    is written unless every input table verified and parsed.
    """
    if isinstance(figure, FigureData):
        data = figure
    else:
        if data_dir is None:
            raise TypeError("data_dir required when passing a figure id")
        data = build_figure(figure, data_dir)
    spec: FigureSpec = data.spec

    os.makedirs(out_dir, exist_ok=True)
    image_path = os.path.join(out_dir, f"fig_{spec.figure_id}.png")
    sidecar_path = os.path.join(out_dir, f"fig_{spec.figure_id}.json")

    fig, ax = plt.subplots(figsize=(5.2, 3.6), dpi=160)
    try:
        ax.set_xscale(spec.x.scale)
        ax.set_yscale(spec.y.scale)
        ax.set_xlabel(spec.x.label)
        ax.set_ylabel(spec.y.label)
        for s in data.series:
            _draw(ax, s)
        if spec.band_below is not None:
            lo = min(min(s.y) for s in data.series) * 0.1
            ax.axhspan(lo, spec.band_below, color="0.82", zorder=0)
            ax.set_ylim(bottom=lo)
        if spec.y2 is not None:
            ax2 = ax.twinx()
            ax2.set_yscale(spec.y2.scale)
            ax2.set_ylabel(spec.y2.label)
            for s in data.y2_series:
                style = dict(_STYLE[s.role])
                style["linestyle"] = "--"
                ax2.plot(s.x, s.y, label=s.label, color="tab:red", **style)
            lines = ax.get_lines() + ax2.get_lines()
            ax.legend(lines, [ln.get_label() for ln in lines],
                      fontsize=7, loc="best")
        else:
            ax.legend(fontsize=7, loc="best")
        fig.tight_layout()
        fig.savefig(image_path)
    finally:
        plt.close(fig)

    payload = sidecar_payload(data)
    with open(sidecar_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return RenderResult(figure_id=spec.figure_id, image_path=image_path,
                        sidecar_path=sidecar_path)
