"""Sparsity-ranked penalized principal-components logistic regression.

Binary decoding of high-dimensional sample x feature (voxel) matrices:
a weighted elastic-net logistic solver, ranked penalty construction with
information-parity calibration of the voxel block, five cross-validated
model families, and voxel-space coefficient map utilities.
"""

from .errors import ConvergenceError, FormatError, ValidationError

__version__ = "0.1.0"

__all__ = ["ConvergenceError", "FormatError", "ValidationError", "__version__"]
