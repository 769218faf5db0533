"""Gaussian mixture learning with Cramer 2-distances."""

from ._backend import BACKEND
from .fit import FitConfig, FitReport, fit_gmm_to_gmm, fit_gmm_to_points
from .gmm1d import Gmm1, c2_squared, c2_squared_grad
from .gmm_nd import (
    DirectionSet, GmmN, directions_equidistant_2d, sample_directions_uniform, sliced_c2_squared,
    sliced_c2_squared_grad,
)

__all__ = [
    "BACKEND", "DirectionSet", "FitConfig", "FitReport", "Gmm1", "GmmN", "c2_squared",
    "c2_squared_grad", "directions_equidistant_2d", "fit_gmm_to_gmm", "fit_gmm_to_points",
    "sample_directions_uniform", "sliced_c2_squared", "sliced_c2_squared_grad",
]
