"""Figure rendering for BD-RIS ISAC experiment CSV outputs."""

from .plots import (
    RenderResult,
    SchemaError,
    plot_beampattern,
    plot_gain_matrix,
    plot_tradeoff,
    read_table,
)

__all__ = [
    "RenderResult",
    "SchemaError",
    "plot_beampattern",
    "plot_gain_matrix",
    "plot_tradeoff",
    "read_table",
]
__version__ = "0.1.0"
