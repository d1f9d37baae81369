"""Chart renderer for coppersim CSV artifacts."""

from .render import PlotSpec, SchemaError, render

__version__ = "0.1.0"

__all__ = ["PlotSpec", "SchemaError", "render", "__version__"]
