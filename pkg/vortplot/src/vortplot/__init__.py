"""Post-hoc visualization for simulation output files.

Reads the volume fields and json reports the simulation CLI writes and
turns them into static PNGs.  Strictly a consumer: nothing here
recomputes physics, so the files on disk stay the single source of
truth.
"""

from .loader import FieldFormatError, LoadedField, load_field
from .plots import (
    ReportContentError,
    parse_plane,
    plot_convergence,
    plot_slice,
    plot_streamlines,
)

__version__ = "0.1.0"

__all__ = [
    "FieldFormatError",
    "LoadedField",
    "ReportContentError",
    "load_field",
    "parse_plane",
    "plot_convergence",
    "plot_slice",
    "plot_streamlines",
    "__version__",
]
