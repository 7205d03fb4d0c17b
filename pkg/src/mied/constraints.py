"""Constraint handling: reparameterization maps and the dynamic barrier.

Maps act row-wise on ``(N, n)`` arrays so every particle is handled
independently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

DEGENERATE_FLOOR = 1e-12


@dataclass(frozen=True)
class ReparamMap:
    """Differentiable map from unconstrained coordinates onto the domain.

    ``pullback(U, cot)`` returns J(U)^T cot row-wise. ``inverse`` is optional
    and only used to place initial particles.
    """

    forward: Callable[[np.ndarray], np.ndarray]
    pullback: Callable[[np.ndarray, np.ndarray], np.ndarray]
    descriptor: str
    inverse: Callable[[np.ndarray], np.ndarray] | None = None


@dataclass(frozen=True)
class InequalityConstraint:
    """Feasible set {x : g(x) <= 0}; ``g`` and ``grad_g`` act row-wise."""

    g: Callable[[np.ndarray], np.ndarray]
    grad_g: Callable[[np.ndarray], np.ndarray]
    alpha: float = 1.0
    descriptor: str = "inequality"


def tanh_box_map(lo, hi) -> ReparamMap:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if lo.shape != hi.shape or np.any(lo >= hi):
        raise ValueError("box bounds need lo < hi in every coordinate")
    half = 0.5 * (hi - lo)

    def forward(U):
        return lo + half * (np.tanh(U) + 1.0)

    def pullback(U, cot):
        t = np.tanh(U)
        return cot * half * (1.0 - t * t)

    def inverse(X):
        return np.arctanh((X - lo) / half - 1.0)

    return ReparamMap(forward, pullback, "tanh_box", inverse)


def sqrt_mirror_map() -> ReparamMap:
    """x = (sqrt(1 + eta^2) - 1) / eta coordinate-wise, onto (-1, 1).

    Written as eta / (sqrt(1 + eta^2) + 1), which is the same function
    without the 0/0 at eta = 0.
    """

    def forward(U):
        return U / (np.sqrt(1.0 + U * U) + 1.0)

    def pullback(U, cot):
        r = np.sqrt(1.0 + U * U)
        return cot / (r * (r + 1.0))

    def inverse(X):
        return 2.0 * X / (1.0 - X * X)

    return ReparamMap(forward, pullback, "sqrt_mirror", inverse)


def simplex_map(K: int) -> ReparamMap:
    """Softmax of (u, 0) truncated to the first K-1 coordinates."""
    if K < 2:
        raise ValueError("simplex map needs K >= 2")

    def _probs(U):
        return special.softmax(np.hstack([U, np.zeros((U.shape[0], 1))]), axis=1)

    def forward(U):
        return _probs(U)[:, :-1]

    def pullback(U, cot):
        x = _probs(U)[:, :-1]
        # d x_i / d u_j = x_i (delta_ij - x_j)
        return x * (cot - np.sum(cot * x, axis=1, keepdims=True))

    def inverse(X):
        last = 1.0 - X.sum(axis=1, keepdims=True)
        return np.log(X) - np.log(last)

    return ReparamMap(forward, pullback, f"simplex{K}", inverse)


def dynamic_barrier_direction(grad_f, g_val, grad_g, alpha: float = 1.0):
    """Descent direction grad_f + lam * grad_g with the barrier multiplier.

    lam = max((alpha g - grad_f . grad_g) / |grad_g|^2, 0), so the direction
    satisfies direction . grad_g >= alpha g whenever lam > 0. Works on a
    single point or row-wise on batches.
    """
    grad_f = np.asarray(grad_f, dtype=float)
    grad_g = np.asarray(grad_g, dtype=float)
    g_val = np.asarray(g_val, dtype=float)
    single = grad_f.ndim == 1
    gf, gg = np.atleast_2d(grad_f), np.atleast_2d(grad_g)
    gv = np.atleast_1d(g_val)
    nsq = np.einsum("ij,ij->i", gg, gg)
    small = nsq < DEGENERATE_FLOOR
    if np.any(small & (gv > 0)):
        raise ValueError("degenerate constraint gradient")
    num = alpha * gv - np.einsum("ij,ij->i", gf, gg)
    lam = np.where(small, 0.0, np.maximum(num / np.where(small, 1.0, nsq), 0.0))
    out = gf + lam[:, None] * gg
    return out[0] if single else out


def ball_constraint(radius: float = 1.0, center=None, alpha: float = 1.0) -> InequalityConstraint:
    """g(x) = |x - c|^2 - r^2."""
    c = None if center is None else np.asarray(center, dtype=float)

    def g(X):
        D = X if c is None else X - c
        return np.einsum("ij,ij->i", D, D) - radius * radius

    def grad_g(X):
        return 2.0 * (X if c is None else X - c)

    return InequalityConstraint(g, grad_g, alpha, f"ball(r={radius:g})")


def halfspace_constraint(normal, offset: float, alpha: float = 1.0) -> InequalityConstraint:
    """g(x) = a . x - b."""
    a = np.asarray(normal, dtype=float)

    def g(X):
        return X @ a - offset

    def grad_g(X):
        return np.broadcast_to(a, X.shape).copy()

    return InequalityConstraint(g, grad_g, alpha, "halfspace")
