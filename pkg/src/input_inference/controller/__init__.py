"""Controller extraction, scale matrices and the closed-form backward recursion."""

from input_inference.controller.extraction import (
    ScaleMatrices,
    compute_gamma_psi,
    extract_controller,
    scale_matrices,
    scale_matrix_gains,
)
from input_inference.controller.policy import LinearGaussianController
from input_inference.controller.riccati import riccati_backward

__all__ = [
    "LinearGaussianController",
    "ScaleMatrices",
    "compute_gamma_psi",
    "extract_controller",
    "riccati_backward",
    "scale_matrices",
    "scale_matrix_gains",
]
