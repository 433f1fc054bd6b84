"""Network model: AC load flow, sensitivity coefficients, affine grid models."""

from .admittance import build_admittance, series_currents
from .loadflow import OperatingPoint, solve_loadflow
from .netfile import load_network, save_network
from .network import Branch, Bus, Network
from .sensitivity import (
    LinearGridModel,
    compute_sensitivities,
    evaluate_linear,
    linearize_horizon,
)

__all__ = [
    "Branch",
    "Bus",
    "LinearGridModel",
    "Network",
    "OperatingPoint",
    "build_admittance",
    "compute_sensitivities",
    "evaluate_linear",
    "linearize_horizon",
    "load_network",
    "save_network",
    "series_currents",
    "solve_loadflow",
]
