"""Mollifier families and the Riesz ball/tail integral identities.

All log-densities here are unnormalized: the log-sum-exp objective used by
the sampler is invariant to the normalizing constants, so they are never
computed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

RIESZ = "riesz"
GAUSSIAN = "gaussian"
LAPLACE = "laplace"
FAMILIES = (RIESZ, GAUSSIAN, LAPLACE)

# integer codes shared with the compiled kernels
FAMILY_CODES = {RIESZ: 0, GAUSSIAN: 1, LAPLACE: 2}

QUAD_ABS_TOL = 1e-10


@dataclass(frozen=True)
class Mollifier:
    """A mollifier family with width ``epsilon``.

    ``s`` is only meaningful for the Riesz family, where it must exceed the
    ambient dimension (see :meth:`check_dim`).
    """

    family: str
    epsilon: float
    s: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown mollifier family {self.family!r}")
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError("epsilon must be a positive finite number")
        if self.family == RIESZ:
            if self.s is None or not self.s > 0:
                raise ValueError("Riesz mollifier requires s > 0")

    @classmethod
    def riesz(cls, s: float, epsilon: float) -> Mollifier:
        return cls(RIESZ, float(epsilon), float(s))

    @classmethod
    def gaussian(cls, epsilon: float) -> Mollifier:
        return cls(GAUSSIAN, float(epsilon))

    @classmethod
    def laplace(cls, epsilon: float) -> Mollifier:
        return cls(LAPLACE, float(epsilon))

    @classmethod
    def default_for_dim(cls, n: int) -> Mollifier:
        """Riesz with s = n + 1e-4 and epsilon = 1e-8."""
        return cls.riesz(n + 1e-4, 1e-8)

    @property
    def code(self) -> int:
        return FAMILY_CODES[self.family]

    @property
    def s_value(self) -> float:
        return 0.0 if self.s is None else self.s

    def check_dim(self, n: int) -> None:
        if self.family == RIESZ and not self.s > n:
            raise ValueError(f"Riesz mollifier needs s > n (s={self.s}, n={n})")


def log_phi(m: Mollifier, sq_dist):
    """Unnormalized log-mollifier at squared distance ``sq_dist``.

    Accepts scalars or arrays; raises on negative or non-finite input.
    """
    d2 = np.asarray(sq_dist, dtype=float)
    if not np.all(np.isfinite(d2)):
        raise ValueError("invalid distance")
    if np.any(d2 < 0):
        raise ValueError("invalid distance")
    eps = m.epsilon
    if m.family == RIESZ:
        out = -0.5 * m.s * _log_sq_plus(d2, eps * eps)
    elif m.family == GAUSSIAN:
        out = -d2 / (2.0 * eps * eps)
    else:
        out = -np.sqrt(d2) / eps
    return float(out) if out.ndim == 0 else out


def _log_sq_plus(d2, e2):
    """ln(d2 + e2) without cancellation in either regime."""
    big = np.maximum(d2, e2)
    small = np.minimum(d2, e2)
    return np.log(big) + np.log1p(small / big)


def grad_log_phi(m: Mollifier, diff) -> np.ndarray:
    """Gradient of ``x -> log_phi(m, |x - y|^2)`` at ``x - y = diff``.

    The Laplace gradient at the origin is defined as zero.
    """
    diff = np.asarray(diff, dtype=float)
    if not np.all(np.isfinite(diff)):
        raise ValueError("invalid displacement")
    d2 = float(diff @ diff)
    eps = m.epsilon
    if m.family == RIESZ:
        return -m.s * diff / (d2 + eps * eps)
    if m.family == GAUSSIAN:
        return -diff / (eps * eps)
    if d2 == 0.0:
        return np.zeros_like(diff)
    return -diff / (eps * math.sqrt(d2))


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere S^{n-1} in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def _quad(f, a, b, points=None) -> float:
    val, _ = integrate.quad(f, a, b, epsabs=QUAD_ABS_TOL, epsrel=1e-12,
                            limit=500, points=points)
    return val


def riesz_ball_integral(n: int, s: float, b: float, eps: float) -> float:
    """Integral of |y|^b / (|y|^2 + eps^2)^(s/2) over the ball of radius eps.

    Uses the radial reduction to a 1-D integral on [0, 1] scaled by
    eps^(n + b - s).
    """
    if n < 1:
        raise ValueError("dimension must be >= 1")
    if b < 0 or eps <= 0:
        raise ValueError("need b >= 0 and eps > 0")
    inner = _quad(lambda t: t ** (n + b - 1) / (t * t + 1.0) ** (s / 2.0), 0.0, 1.0)
    return sphere_area(n) * inner * eps ** (n + b - s)


def riesz_tail_bound(n: int, s: float, b: float, delta: float) -> float:
    """Upper bound on the Riesz numerator integral outside the delta-ball."""
    if not s > n + b:
        raise ValueError("bound requires s > n+b")
    if delta <= 0:
        raise ValueError("delta must be positive")
    return sphere_area(n) * delta ** (n + b - s) / (s - (n + b))


def riesz_radial_integral(n: int, s: float, b: float, eps: float,
                          r0: float, r1: float = math.inf) -> float:
    """Integral of the Riesz numerator times |y|^b over the shell r0 <= |y| < r1."""
    def f(r):
        return r ** (n + b - 1) / (r * r + eps * eps) ** (s / 2.0)

    if math.isinf(r1):
        # split at r0 + 1 so quad's infinite-range transform sees a smooth tail
        return sphere_area(n) * (_quad(f, r0, r0 + 1.0) + _quad(f, r0 + 1.0, math.inf))
    pts = [eps] if r0 < eps < r1 else None
    return sphere_area(n) * _quad(f, r0, r1, points=pts)


def riesz_concentration_ratio(n: int, s: float, eps: float, delta: float) -> float:
    """Mass inside B_delta over mass outside it, for the unnormalized Riesz kernel."""
    inside = riesz_radial_integral(n, s, 0.0, eps, 0.0, delta)
    outside = riesz_radial_integral(n, s, 0.0, eps, delta)
    return inside / outside

