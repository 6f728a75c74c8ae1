"""Matplotlib helpers for the CLI report paths.

Everything renders through the Agg backend straight to files, so the
helpers work headless.  SVG is the default format: the plots are simple
line/scatter ensembles and stay small as vector output.

The config dict that produced the data is embedded in the SVG metadata
(Description field), matching the rule that every emitted artifact can be
traced back to its configuration.
"""

from __future__ import annotations

import json

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def _finalize(fig, ax, path, title, xlabel, ylabel, logx, logy, config):
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    if ax.get_legend_handles_labels()[0]:
        ax.legend(fontsize=8)
    metadata = None
    if config is not None and str(path).endswith(".svg"):
        metadata = {"Description": json.dumps(config, sort_keys=True)}
    fig.savefig(path, metadata=metadata, bbox_inches="tight")
    plt.close(fig)


def series_plot(
    path,
    x,
    series,
    xlabel="t",
    ylabel="",
    title=None,
    logx=False,
    logy=False,
    hlines=(),
    guides=(),
    config=None,
):
    """Mean-with-error-band line plot.

    series maps label -> (y,) or (y, stderr) or (x_own, y, stderr); the
    third form lets curves with different grids share one figure.  hlines
    are (value, label) reference levels, guides are (x, y, label) extra
    line data drawn dashed (fit overlays, power-law guides).
    """
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for label, data in series.items():
        if len(data) == 3:
            xs, y, err = data
        elif len(data) == 2:
            xs, (y, err) = x, data
        else:
            xs, y, err = x, data[0], None
        line, = ax.plot(xs, y, lw=1.2, label=label)
        if err is not None:
            ax.fill_between(
                xs, y - err, y + err, alpha=0.25, color=line.get_color(), lw=0
            )
    for value, label in hlines:
        ax.axhline(value, color="grey", ls=":", lw=1.0)
        ax.text(
            0.98, value, label, ha="right", va="bottom",
            transform=ax.get_yaxis_transform(), fontsize=7, color="grey",
        )
    for gx, gy, glabel in guides:
        ax.plot(gx, gy, ls="--", lw=1.0, color="black", label=glabel)
    _finalize(fig, ax, path, title, xlabel, ylabel, logx, logy, config)


def staircase_plot(
    path,
    trajectories,
    mean=None,
    xlabel="t",
    ylabel="",
    title=None,
    config=None,
):
    """A few single trajectories as steps, optionally with the ensemble mean.

    trajectories is a list of (steps, values); mean is (steps, values).
    """
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for i, (ts, vals) in enumerate(trajectories):
        ax.step(ts, vals, where="post", lw=0.9, alpha=0.7,
                label=f"trajectory {i}" if len(trajectories) <= 4 else None)
    if mean is not None:
        ax.plot(mean[0], mean[1], color="black", lw=1.8, label="ensemble mean")
    _finalize(fig, ax, path, title, xlabel, ylabel, False, False, config)


def scatter_plot(
    path,
    points,
    xlabel="",
    ylabel="",
    title=None,
    logx=False,
    logy=False,
    guides=(),
    config=None,
):
    """Labelled scatter with optional error bars and dashed guide curves.

    points maps label -> (x, y) or (x, y, yerr).
    """
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for label, data in points.items():
        if len(data) == 3:
            ax.errorbar(data[0], data[1], yerr=data[2], fmt="o", ms=4,
                        capsize=2, label=label)
        else:
            ax.plot(data[0], data[1], "o", ms=4, label=label)
    for gx, gy, glabel in guides:
        ax.plot(gx, gy, ls="--", lw=1.0, color="black", label=glabel)
    _finalize(fig, ax, path, title, xlabel, ylabel, logx, logy, config)
