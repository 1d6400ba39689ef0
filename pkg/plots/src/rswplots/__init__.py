"""Figure rendering for rswlab CSV/JSON artifacts."""

from .figures import FIGURE_KINDS, FigureSpec, SchemaError, plot, read_csv, read_study_json

__all__ = ["FIGURE_KINDS", "FigureSpec", "SchemaError", "plot", "read_csv",
           "read_study_json"]

__version__ = "0.1.0"
