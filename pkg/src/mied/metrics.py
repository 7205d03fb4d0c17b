"""Sample-quality metrics: exact W2, energy distance, box restriction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linear_sum_assignment, linprog
from scipy.spatial.distance import cdist

# above this replicated size, W2 is solved as a transport LP instead
MAX_ASSIGNMENT = 6000
# the LP is also used when its nx*ny variables are this many times fewer than L^2
LP_ADVANTAGE = 20


@dataclass
class MetricReport:
    w2: float
    energy_dist: float
    n_used_x: int
    n_used_y: int


def _points(X):
    X = np.asarray(X, dtype=float)
    return X[:, None] if X.ndim == 1 else X


def w2_exact(X, Y) -> float:
    """Exact W2 between equal-size uniform empirical measures."""
    X, Y = _points(X), _points(Y)
    if X.shape[0] != Y.shape[0]:
        raise ValueError(f"size mismatch: {X.shape[0]} vs {Y.shape[0]}")
    if X.shape[0] == 0:
        raise ValueError("empty point sets")
    C = cdist(X, Y, "sqeuclidean")
    rows, cols = linear_sum_assignment(C)
    return math.sqrt(max(C[rows, cols].sum(), 0.0) / X.shape[0])


def w2_empirical(X, Y) -> float:
    """Exact W2 between uniform empirical measures of any sizes.

    Each point set is replicated up to lcm(|X|, |Y|) points; the assignment
    problem on the replicas has the same optimum as the transport LP. When the
    replicated problem is much larger than the LP itself, the LP is solved.
    """
    X, Y = _points(X), _points(Y)
    nx, ny = X.shape[0], Y.shape[0]
    if nx == ny:
        return w2_exact(X, Y)
    if nx == 0 or ny == 0:
        raise ValueError("empty point sets")
    L = math.lcm(nx, ny)
    if L > MAX_ASSIGNMENT or LP_ADVANTAGE * nx * ny < L * L:
        return _w2_transport_lp(X, Y)
    return w2_exact(np.repeat(X, L // nx, axis=0), np.repeat(Y, L // ny, axis=0))


def _w2_transport_lp(X, Y) -> float:
    nx, ny = X.shape[0], Y.shape[0]
    C = cdist(X, Y, "sqeuclidean")
    # marginals: row sums 1/nx, column sums 1/ny
    rows = sparse.kron(sparse.eye(nx), np.ones((1, ny)))
    cols = sparse.kron(np.ones((1, nx)), sparse.eye(ny))
    A = sparse.vstack([rows, cols]).tocsr()
    b = np.concatenate([np.full(nx, 1.0 / nx), np.full(ny, 1.0 / ny)])
    res = linprog(C.ravel(), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    if not res.success:
        raise RuntimeError(f"transport LP failed: {res.message}")
    return math.sqrt(max(res.fun, 0.0))


def energy_distance(X, Y) -> float:
    """V-statistic energy distance 2E|X-Y| - E|X-X'| - E|Y-Y'|."""
    X, Y = _points(X), _points(Y)
    if X.shape[0] == 0 or Y.shape[0] == 0:
        raise ValueError("energy distance needs non-empty point sets")
    # exactly rounded cross sum and combination: swapping X and Y gives the same bits
    xy = math.fsum(cdist(X, Y).ravel()) / (X.shape[0] * Y.shape[0])
    xx = float(cdist(X, X).mean())
    yy = float(cdist(Y, Y).mean())
    return math.fsum((2.0 * xy, -xx, -yy))


def box_restrict(X, a: float) -> np.ndarray:
    if not a > 0:
        raise ValueError("box half-width must be positive")
    X = _points(X)
    return X[np.all(np.abs(X) <= a, axis=1)]


def compare(X, Y, box: float | None = None) -> MetricReport:
    """Both metrics between samples ``X`` and reference ``Y``."""
    if box is not None:
        X, Y = box_restrict(X, box), box_restrict(Y, box)
    return MetricReport(w2_empirical(X, Y), energy_distance(X, Y), len(X), len(Y))
