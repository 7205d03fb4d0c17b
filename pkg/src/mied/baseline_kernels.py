"""RBF kernel utilities for the SVGD baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist


@dataclass(frozen=True)
class RbfKernel:
    bandwidth_sq: float

    def __post_init__(self):
        if not self.bandwidth_sq > 0:
            raise ValueError("bandwidth must be positive")


def median_heuristic(X) -> float:
    """median(pairwise squared distances) / ln(max(N, 2)); 1.0 when degenerate."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    N = X.shape[0]
    if N < 2:
        return 1.0
    med = float(np.median(pdist(X, "sqeuclidean")))
    if med == 0.0:
        return 1.0
    return med / math.log(max(N, 2))


def rbf_and_grad(k: RbfKernel, x, y):
    """Return k(x, y) = exp(-|x-y|^2 / h) and its gradient in x."""
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    val = math.exp(-float(d @ d) / k.bandwidth_sq)
    return val, -2.0 * d * val / k.bandwidth_sq


def svgd_direction(X, grad_logp, h: float) -> np.ndarray:
    """Stein variational direction for every particle (ascent direction)."""
    diff = X[:, None, :] - X[None, :, :]  # x_j - x_i at [j, i]
    Kmat = np.exp(-np.einsum("jik,jik->ji", diff, diff) / h)
    drive = Kmat.T @ grad_logp
    # grad_{x_j} k(x_j, x_i) = -2 (x_j - x_i) k / h, summed over j
    repulse = -2.0 / h * np.einsum("ji,jik->ik", Kmat, diff)
    return (drive + repulse) / X.shape[0]
