"""Particle sampling by descent on the mollified interaction energy."""

from ._kernels import BACKEND
from .energy import (EnergyReport, grad_log_energy, kappa, log_energy,
                     log_energy_and_grad, nearest_neighbor_dists)
from .mollifiers import Mollifier

__all__ = [
    "BACKEND",
    "EnergyReport",
    "Mollifier",
    "grad_log_energy",
    "kappa",
    "log_energy",
    "log_energy_and_grad",
    "nearest_neighbor_dists",
]
