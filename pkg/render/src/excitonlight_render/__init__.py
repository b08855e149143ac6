"""Figure rendering for excitonlight CSV bundles; consumer only."""

__version__ = "0.1.0"

from .figures import FIGURE_SPECS, EmptyDataError, RenderError, load_bundle, render

__all__ = ["FIGURE_SPECS", "EmptyDataError", "RenderError", "load_bundle",
           "render", "__version__"]
