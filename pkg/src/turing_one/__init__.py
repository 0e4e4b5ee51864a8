"""Type-I / Type-II Turing instability analysis for single-diffuser reaction-diffusion systems."""

from importlib import metadata as _metadata

from . import classify, grayscott, model, numerics, pdesim
from .errors import TuringError

try:
    __version__ = _metadata.version("artifact")
except _metadata.PackageNotFoundError:
    __version__ = "0+unknown"

__all__ = ["classify", "grayscott", "model", "numerics", "pdesim", "TuringError", "__version__"]
