"""Figure generation from spfem CSV artifacts.

Strictly a consumer of the solver's CSV files: diagnostics traces become
semilog conservation plots, field snapshots become heatmaps, and
convergence tables become log-log plots with reference slopes. Nothing
here links against the solver; any file with the right columns works.
"""

from .errors import FigureError
from .io import read_columns, read_grid
from .plots import (
    FLOOR,
    build_conservation_figure,
    build_convergence_figure,
    build_heatmap_figure,
    plot_conservation,
    plot_convergence,
    plot_heatmap,
)

__version__ = "0.1.0"

__all__ = [
    "FigureError",
    "read_columns",
    "read_grid",
    "FLOOR",
    "build_conservation_figure",
    "build_convergence_figure",
    "build_heatmap_figure",
    "plot_conservation",
    "plot_convergence",
    "plot_heatmap",
    "__version__",
]
