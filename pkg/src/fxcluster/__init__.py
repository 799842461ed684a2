"""Hierarchical clustering of time series by the similarity of their fluctuation distributions."""

from ._kernels import BACKEND
from .errors import FxClusterError, InputError, NumericError

__version__ = "0.1.0"

__all__ = ["BACKEND", "FxClusterError", "InputError", "NumericError", "__version__"]
