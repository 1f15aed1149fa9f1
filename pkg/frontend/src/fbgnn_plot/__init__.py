"""Log-log logical-error-rate plots from the simulator's results CSV."""

from .render import CurveSpec, MissingColumnsError, render

__all__ = ["CurveSpec", "MissingColumnsError", "render"]
