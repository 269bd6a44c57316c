"""Learning-curve figures from the regret CLI's CSV output.

No numerical logic lives here: every number drawn comes out of a curve file
produced by the `nvregret` command line and validated against the frozen
schema before rendering.
"""

from .curves import CurveFile, SchemaError, build_figure, render_learning_curves

__all__ = ["CurveFile", "SchemaError", "build_figure", "render_learning_curves"]
