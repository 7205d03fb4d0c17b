"""Tensor-grid quadrature for the chi-square divergence and the continuous MIE.

Densities are callables on ``(M, dim)`` node arrays and may be unnormalized;
both are normalized numerically on the grid. The mollifier is normalized
over the lattice of grid differences, so the unnormalized ``log_phi`` is
enough.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .mollifiers import Mollifier, log_phi

TRUNCATION_SDS = 8.0
# grid spacing may not exceed epsilon / SPACING_RATIO
SPACING_RATIO = 3.0


@dataclass
class GridMeasure:
    dim: int
    axes: list[np.ndarray]
    spacing: float
    nodes: np.ndarray
    weights: np.ndarray
    volume: float

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("only 1-D and 2-D grids are supported")
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > 1e-10:
            raise ValueError("grid weights must be nonnegative and sum to 1")

    @property
    def lebesgue_weights(self) -> np.ndarray:
        return self.weights * self.volume

    @property
    def shape(self):
        return tuple(len(a) for a in self.axes)


def make_grid(lo: float, hi: float, spacing: float, dim: int = 1) -> GridMeasure:
    """Uniform tensor grid on [lo, hi]^dim with trapezoid weights (normalized)."""
    if not hi > lo or not spacing > 0:
        raise ValueError("need hi > lo and spacing > 0")
    m = int(math.ceil((hi - lo) / spacing)) + 1
    ax = np.linspace(lo, hi, m)
    h = ax[1] - ax[0]
    w1 = np.full(m, h)
    w1[0] = w1[-1] = h / 2
    axes = [ax] * dim
    if dim == 1:
        nodes, W = ax[:, None], w1
    else:
        g0, g1 = np.meshgrid(ax, ax, indexing="ij")
        nodes = np.column_stack([g0.ravel(), g1.ravel()])
        W = np.outer(w1, w1).ravel()
    return GridMeasure(dim, axes, h, nodes, W / W.sum(), float(W.sum()))


def grid_for(means, sds, spacing: float, dim: int = 1) -> GridMeasure:
    """Grid covering every mean +- 8 standard deviations of the widest density."""
    means = np.atleast_1d(np.asarray(means, dtype=float))
    half = TRUNCATION_SDS * float(np.max(sds))
    return make_grid(float(means.min()) - half, float(means.max()) + half, spacing, dim)


def _normalized(density, grid):
    """Density values rescaled to unit Lebesgue mass on the grid."""
    vals = np.asarray(density(grid.nodes), dtype=float).reshape(-1)
    mass = float(vals @ grid.lebesgue_weights)
    if not mass > 0:
        raise ValueError("density has no mass on the grid")
    return vals / mass


def chi2_quadrature(q_density, p_density, grid: GridMeasure) -> float:
    """chi^2(q || p) = integral of q^2 / p minus 1, on the grid."""
    p_raw = np.asarray(p_density(grid.nodes), dtype=float).reshape(-1)
    if np.any(p_raw <= 0):
        raise ValueError("p must be positive at every grid node")
    q = _normalized(q_density, grid)
    p = _normalized(p_density, grid)
    return max(float(((q * q) / p) @ grid.lebesgue_weights) - 1.0, 0.0)


def _phi_lattice(m: Mollifier, grid: GridMeasure):
    """Normalized mollifier on the lattice of grid differences."""
    h = grid.spacing
    n = grid.shape[0]
    k = np.arange(-(n - 1), n) * h
    if grid.dim == 1:
        d2 = k * k
    else:
        d2 = k[:, None] ** 2 + k[None, :] ** 2
    lp = log_phi(m, d2)
    phi = np.exp(lp - lp.max())
    return phi / (phi.sum() * h ** grid.dim)


def continuous_mie_quadrature(q_density, p_density, m: Mollifier, grid: GridMeasure) -> float:
    """Double quadrature of phi(x - y) (p(x) p(y))^(-1/2) q(x) q(y)."""
    if grid.spacing > m.epsilon / SPACING_RATIO * (1 + 1e-12):
        raise ValueError(
            f"grid too coarse: spacing {grid.spacing:.4g} exceeds epsilon/{SPACING_RATIO:g}"
            f" = {m.epsilon / SPACING_RATIO:.4g}")
    p_raw = np.asarray(p_density(grid.nodes), dtype=float).reshape(-1)
    if np.any(p_raw <= 0):
        raise ValueError("p must be positive at every grid node")
    q = _normalized(q_density, grid)
    p = _normalized(p_density, grid)
    f = q / np.sqrt(p) * grid.lebesgue_weights
    phi = _phi_lattice(m, grid)
    if grid.dim == 1:
        conv = np.convolve(f, phi, mode="valid")
    else:
        F = f.reshape(grid.shape)
        conv = signal.fftconvolve(F, phi, mode="valid").ravel()
    return float(f @ conv)
