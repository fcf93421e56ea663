"""The three figure builders and their file-writing wrappers.

Each build_* function returns a matplotlib Figure so tests can inspect
axes and legends; each plot_* wrapper renders it to a PNG and closes it.
Inputs are never modified.
"""

import warnings
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import FigureError
from .io import read_columns, read_grid

# semilog traces cannot show exact zeros; clamp here instead of dropping points
FLOOR = 1e-17

_SERIES = [
    ("mass_change", "mass"),
    ("energy_mod_change", "staggered energy"),
    ("energy_orig_change", "midpoint energy"),
]


def build_conservation_figure(paths, labels=None):
    """Semilog drift traces from one or two diagnostics files.

    With two files the same quantities are overlaid and the legend carries
    the per-file labels (file stems unless given). Columns that are entirely
    NaN, like the energies of a mass-only trace, are skipped.
    """
    paths = [Path(p) for p in paths]
    if not 1 <= len(paths) <= 2:
        raise FigureError(f"conservation plot takes 1 or 2 inputs, got {len(paths)}")
    if labels is None:
        labels = [p.stem for p in paths]
    if len(labels) != len(paths):
        raise FigureError(f"{len(paths)} inputs but {len(labels)} labels")

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for path, label, style in zip(paths, labels, ["-", "--"]):
        cols = read_columns(path, ["t"] + [c for c, _ in _SERIES])
        t = cols["t"]
        for column, series_name in _SERIES:
            v = cols[column]
            if np.isnan(v).all():
                continue
            name = series_name if len(paths) == 1 else f"{series_name} ({label})"
            ax.semilogy(t, np.maximum(np.abs(v), FLOOR), style, label=name)
    ax.set_xlabel("t")
    ax.set_ylabel("relative change")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    return fig


def build_heatmap_figure(path):
    """Color map of |u| over the snapshot lattice."""
    xs, ys, Z = read_grid(path)
    fig, ax = plt.subplots(figsize=(5.6, 4.8))
    mesh = ax.pcolormesh(xs, ys, Z, shading="auto", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="|u|")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_aspect("equal")
    ax.set_title(Path(path).stem)
    fig.tight_layout()
    return fig


def build_convergence_figure(path):
    """Log-log error versus refinement level with slope-2 and slope-3 guides."""
    cols = read_columns(path, ["level", "error"])
    levels, errors = cols["level"], cols["error"]
    keep = np.isfinite(errors) & (errors > 0) & np.isfinite(levels) & (levels > 0)
    if not keep.all():
        warnings.warn(
            f"{path}: skipping {int((~keep).sum())} row(s) without a positive error",
            stacklevel=2,
        )
    levels, errors = levels[keep], errors[keep]
    if levels.size == 0:
        raise FigureError(f"{path}: no positive error rows to plot")

    fig, ax = plt.subplots(figsize=(5.6, 4.5))
    ax.loglog(levels, errors, "o-", label="measured")

    # guides run in the direction the data slopes, anchored at the first point
    sign = 1.0
    if levels.size >= 2:
        fit = np.polyfit(np.log(levels), np.log(errors), 1)[0]
        sign = 1.0 if fit >= 0 else -1.0
    ref = np.array([levels.min(), levels.max()])
    for slope, style in [(2.0, ":"), (3.0, "-.")]:
        guide = errors[0] * (ref / levels[0]) ** (sign * slope)
        ax.loglog(ref, guide, style, color="gray", label=f"slope {slope:g}")
    ax.set_xlabel("refinement level")
    ax.set_ylabel("two-level error")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    return fig


def _save(fig, out) -> Path:
    out = Path(out)
    try:
        fig.savefig(out, dpi=150)
    except OSError as e:
        raise FigureError(f"cannot write {out}: {e}")
    finally:
        plt.close(fig)
    return out


def plot_conservation(paths, out, labels=None) -> Path:
    return _save(build_conservation_figure(paths, labels), out)


def plot_heatmap(path, out) -> Path:
    return _save(build_heatmap_figure(path), out)


def plot_convergence(path, out) -> Path:
    return _save(build_convergence_figure(path), out)
