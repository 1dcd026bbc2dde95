"""SVG figures: metric-versus-n line charts and pair-value scatter/histograms."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from netinfer.errors import ParameterError  # noqa: E402

_SVG_RC = {"svg.hashsalt": "netinfer", "svg.fonttype": "path", "path.simplify": False}
_METADATA = {"Date": None, "Creator": "netinfer"}


def _float(s: str) -> float:
    return float(s) if s != "" else math.nan


def _save(fig, out_path) -> None:
    Path(out_path).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, format="svg", metadata=_METADATA)
    plt.close(fig)


def emit_plot(csv_path, x_field: str, y_field: str, series_field: str, out_path,
              where: dict | None = None, log_x: bool = False, title: str | None = None) -> dict[str, int]:
    """Line chart of ``y_field`` against ``x_field``, one line per ``series_field`` value.

    When ``y_field`` is ``<metric>_mean`` and the matching ``_ci_low``/``_ci_high``
    columns exist, the confidence band is shaded. ``where`` keeps only rows whose
    columns equal the given values. Returns the number of points per series.
    """
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        columns = reader.fieldnames or []
        rows = list(reader)
    for f in (x_field, y_field, series_field, *(where or {})):
        if f not in columns:
            raise ParameterError(f"unknown field {f!r}; available: {', '.join(columns)}")
    if where:
        rows = [r for r in rows if all(r[k] == str(v) for k, v in where.items())]

    band = None
    if y_field.endswith("_mean"):
        base = y_field[: -len("_mean")]
        if f"{base}_ci_low" in columns and f"{base}_ci_high" in columns:
            band = (f"{base}_ci_low", f"{base}_ci_high")

    series: dict[str, list[tuple[float, float, float, float]]] = {}
    for r in rows:
        lo, hi = (_float(r[band[0]]), _float(r[band[1]])) if band else (math.nan, math.nan)
        series.setdefault(r[series_field], []).append((_float(r[x_field]), _float(r[y_field]), lo, hi))

    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        counts = {}
        for name in sorted(series):
            pts = np.array(sorted(series[name]))
            counts[name] = len(pts)
            if len(pts) == 1:
                line = ax.plot(pts[:, 0], pts[:, 1], linestyle="none", marker="o", label=name)[0]
            else:
                line = ax.plot(pts[:, 0], pts[:, 1], marker="o", markersize=3, label=name)[0]
            if band is not None and np.isfinite(pts[:, 2:]).any():
                ax.fill_between(pts[:, 0], pts[:, 2], pts[:, 3], color=line.get_color(), alpha=0.2, linewidth=0)
        if log_x:
            ax.set_xscale("log")
        ax.set_xlabel(x_field)
        ax.set_ylabel(y_field)
        if title:
            ax.set_title(title)
        if counts:
            ax.legend(title=series_field, fontsize="small")
        ax.grid(alpha=0.3)
        fig.tight_layout()
        _save(fig, out_path)
    return counts


def emit_scatter(panels, out_path) -> None:
    """Pair values coloured by ground truth, with per-class histograms.

    ``panels`` is a sequence of ``(title, values, truth_labels)``.
    """
    panels = list(panels)
    if not panels:
        raise ParameterError("need at least one panel")
    with plt.rc_context(_SVG_RC):
        fig, axes = plt.subplots(2, len(panels), figsize=(4.2 * len(panels), 6.0), squeeze=False)
        for col, (title, values, truth) in enumerate(panels):
            values = np.asarray(values, dtype=np.float64)
            truth = np.asarray(truth).astype(bool)
            idx = np.arange(values.size)
            top, bottom = axes[0, col], axes[1, col]
            top.scatter(idx[~truth], values[~truth], s=4, label="0 (disconnected)")
            top.scatter(idx[truth], values[truth], s=4, label="1 (connected)")
            top.set_title(title)
            top.set_xlabel("pair index")
            top.set_ylabel("estimate")
            top.legend(fontsize="small")
            bins = np.histogram_bin_edges(values, bins=40)
            bottom.hist(values[~truth], bins=bins, alpha=0.6, label="0")
            bottom.hist(values[truth], bins=bins, alpha=0.6, label="1")
            bottom.set_xlabel("estimate")
            bottom.set_ylabel("count")
        fig.tight_layout()
        _save(fig, out_path)
