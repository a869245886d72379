"""SVG line charts with shaded violation bands.

Figures are drawn on a bare :class:`matplotlib.figure.Figure` (no pyplot state).
Every series line carries the SVG id ``series-<k>`` and every band
``violation-band-<k>``, so the output can be inspected without a renderer.
"""
from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
from matplotlib.figure import Figure  # noqa: E402

import numpy as np  # noqa: E402

RC = {
    "svg.hashsalt": "nmlg",
    "svg.fonttype": "none",
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "lines.linewidth": 1.4,
}


@dataclass
class SeriesBundle:
    x: np.ndarray
    series: list[tuple[str, np.ndarray]] = field(default_factory=list)
    bands: list[tuple[float, float]] = field(default_factory=list)
    hlines: list[tuple[str, float]] = field(default_factory=list)
    xlabel: str = "t (ms)"
    ylabel: str = ""
    title: str = ""
    x_scale: float = 1e3

    def add(self, label: str, y) -> "SeriesBundle":
        self.series.append((label, np.asarray(y, dtype=float)))
        return self


def emit_svg(bundle: SeriesBundle, path) -> Path:
    """Render ``bundle`` to a standalone SVG file (written atomically)."""
    if not bundle.series:
        raise ValueError("nothing to plot: the bundle has no series")
    path = Path(path)
    with matplotlib.rc_context(RC):
        fig = Figure(figsize=(6.4, 3.6))
        ax = fig.add_subplot()
        x = np.asarray(bundle.x, dtype=float) * bundle.x_scale
        for k, (a, b) in enumerate(bundle.bands):
            ax.axvspan(a * bundle.x_scale, b * bundle.x_scale, color="0.85", lw=0, zorder=0,
                       gid=f"violation-band-{k}", label="violation" if k == 0 else None)
        for label, level in bundle.hlines:
            ax.axhline(level, color="0.4", ls=":", lw=1, label=label)
        for k, (label, y) in enumerate(bundle.series):
            ax.plot(x, y, label=label, gid=f"series-{k}")
        ax.set_xlabel(bundle.xlabel)
        ax.set_ylabel(bundle.ylabel)
        if bundle.title:
            ax.set_title(bundle.title)
        ax.legend(loc="best", frameon=False)
        fig.tight_layout()
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".svg", dir=path.parent)
        os.close(fd)
        try:
            fig.savefig(tmp, format="svg", metadata={"Date": None})
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    return path


def witness_bundle(report) -> SeriesBundle:
    b = SeriesBundle(report.grid.times, ylabel="witness value", title="temporal inequalities")
    b.add("$L_Q$", report.lq).add("$H_1$", report.h1).add("$H_2$", report.h2)
    b.hlines.append(("bound 1", 1.0))
    b.bands = list(report.intervals.get("lq", []))
    return b


def trace_bundle(trace) -> SeriesBundle:
    b = SeriesBundle(trace.times, ylabel=r"$\langle\sigma_-\rangle$", title="transverse magnetization")
    return b.add("Re", trace.values.real).add("Im", trace.values.imag)


def generator_bundle(series) -> SeriesBundle:
    b = SeriesBundle(series.times, ylabel="rate (1/s)", title="inferred master-equation coefficients")
    return b.add(r"$\hat f$", series.f_hat).add(r"$\hat g$", series.g_hat)


def nonmarkov_bundle(report) -> SeriesBundle:
    b = SeriesBundle(report.grid.times, ylabel="1/s", title="divisibility and trace-distance witnesses")
    b.add(r"$\gamma + g$", report.total_rate).add(r"$\sigma$", report.sigma)
    b.hlines.append(("zero", 0.0))
    b.bands = list(report.nm_intervals)
    return b
