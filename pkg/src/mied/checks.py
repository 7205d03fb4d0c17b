"""Self-checks run by ``mied oracle-check``.

Each check compares an implementation against an independent route
(closed form, direct quadrature, or an identity) at a fixed tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.stats import norm

from . import energy, mollifiers as M, oracle

EPS_SWEEP = (0.4, 0.2, 0.1, 0.05)


@dataclass
class CheckResult:
    name: str
    measured: float
    criterion: str
    passed: bool


def gaussian_chi2(delta: float) -> float:
    """chi^2 between unit-variance Gaussians whose means differ by delta."""
    return math.expm1(delta * delta)


def _gauss1(mu, sd):
    return lambda x: norm.pdf(x[:, 0], mu, sd)


# (label, q mean, q sd) against p = N(0, 1)
MIE_PAIRS = (("q=N(0,1)", 0.0, 1.0), ("q=N(0.5,1)", 0.5, 1.0), ("q=N(0,1.2^2)", 0.0, 1.2))


def mie_sweep(mu, sd, family=M.GAUSSIAN, eps_values=EPS_SWEEP):
    q, p = _gauss1(mu, sd), _gauss1(0.0, 1.0)
    chi2 = oracle.chi2_quadrature(q, p, oracle.grid_for([0.0, mu], [1.0, sd], 0.005))
    vals = []
    for eps in eps_values:
        grid = oracle.grid_for([0.0, mu], [1.0, sd], eps / oracle.SPACING_RATIO)
        vals.append(oracle.continuous_mie_quadrature(q, p, M.Mollifier(family, eps), grid))
    return chi2, np.array(vals)


def direct_riesz_ball(n: int, s: float, b: float, eps: float) -> float:
    """Cartesian quadrature of |y|^b / (|y|^2 + eps^2)^(s/2) over the eps-ball."""
    def f1(y):
        return abs(y) ** b / (y * y + eps * eps) ** (s / 2)

    if n == 1:
        return integrate.quad(f1, -eps, eps, points=[0.0], epsabs=1e-13, epsrel=1e-12)[0]
    if n == 2:
        def f2(y, x):
            r2 = x * x + y * y
            return r2 ** (b / 2) / (r2 + eps * eps) ** (s / 2)
        val, _ = integrate.dblquad(f2, -eps, eps, lambda x: -math.sqrt(max(eps * eps - x * x, 0)),
                                   lambda x: math.sqrt(max(eps * eps - x * x, 0)),
                                   epsabs=1e-13, epsrel=1e-11)
        return val
    raise ValueError("direct quadrature only for n in {1, 2}")


RIESZ_CASES = ((1, 2.0, 0.0, 0.5), (1, 3.0, 1.0, 0.3), (2, 3.0, 0.0, 0.4))


def diagonal_bounds_hold(rng, kappa_override=None, trials=50) -> tuple[bool, int]:
    """Per-particle and whole-energy ordering of the three diagonal treatments."""
    bad = 0
    for _ in range(trials):
        N, n = int(rng.integers(2, 12)), int(rng.integers(1, 5))
        X = rng.normal(size=(N, n))
        lp = rng.normal(size=N)
        fam = rng.choice(M.FAMILIES)
        eps = float(rng.uniform(0.2, 2.0))
        m = M.Mollifier.riesz(n + 1e-4 + rng.uniform(0, 2), eps) if fam == M.RIESZ \
            else M.Mollifier(fam, eps)
        k = energy.kappa(n) if kappa_override is None else kappa_override
        h = energy.nearest_neighbor_dists(X)
        diag = M.log_phi(m, (h / k) ** 2)
        per = np.all(diag >= M.log_phi(m, h ** 2)) and np.all(diag <= M.log_phi(m, 0.0))
        lo = energy.log_energy(X, lp, m, diag=energy.DIAG_NONE).log_energy
        mid = energy.log_energy(X, lp, m, kappa_value=k).log_energy
        hi = energy.log_energy(X, lp, m, diag=energy.DIAG_ZERO).log_energy
        if not (per and lo <= mid <= hi):
            bad += 1
    return bad == 0, bad


def run_checks(kappa_override: float | None = None) -> list[CheckResult]:
    out: list[CheckResult] = []

    for label, mu, sd in MIE_PAIRS:
        chi2, vals = mie_sweep(mu, sd)
        err = np.abs(vals - (chi2 + 1.0))
        mono = bool(np.all(np.diff(err) <= 0))
        rel = err[-1] / (chi2 + 1.0)
        out.append(CheckResult(
            f"mie->chi2+1 {label}", rel,
            "rel err < 5% at eps=0.05, abs err < 0.05, monotone over eps sweep",
            rel < 0.05 and err[-1] < 0.05 and mono))

    for delta in (0.25, 0.5):
        q, p = _gauss1(delta, 1.0), _gauss1(0.0, 1.0)
        val = oracle.chi2_quadrature(q, p, oracle.grid_for([0.0, delta], [1.0], 0.005))
        err = abs(val - gaussian_chi2(delta))
        out.append(CheckResult(f"chi2 closed form delta={delta}", err, "abs err < 1e-4",
                               err < 1e-4))

    _, g = mie_sweep(0.5, 1.0, M.GAUSSIAN, (0.05,))
    _, lap = mie_sweep(0.5, 1.0, M.LAPLACE, (0.05,))
    rel = abs(g[0] - lap[0]) / g[0]
    out.append(CheckResult("gaussian vs laplace limit (eps=0.05)", rel, "rel diff < 2%",
                           rel < 0.02))

    for n, s, b, eps in RIESZ_CASES:
        val = M.riesz_ball_integral(n, s, b, eps)
        ref = direct_riesz_ball(n, s, b, eps)
        rel = abs(val - ref) / abs(ref)
        out.append(CheckResult(f"riesz ball integral (n={n},s={s:g},b={b:g},eps={eps:g})",
                               rel, "rel err < 1e-4", rel < 1e-4))

    bound = M.riesz_tail_bound(1, 3.0, 0.0, 1.0)
    tails = [M.riesz_radial_integral(1, 3.0, 0.0, e, 1.0) for e in (0.1, 1.0)]
    out.append(CheckResult("riesz tail bound dominates (n=1,s=3,delta=1)", max(tails),
                           f"tail <= {bound:g}", max(tails) <= bound))

    r_small = M.riesz_concentration_ratio(1, 2.0, 1e-3, 0.5)
    r_big = M.riesz_concentration_ratio(1, 2.0, 1e-1, 0.5)
    out.append(CheckResult("riesz mass concentrates as eps -> 0", r_small / r_big,
                           "ratio(eps=1e-3) / ratio(eps=1e-1) > 1", r_small > r_big))

    ok, bad = diagonal_bounds_hold(np.random.default_rng(0), kappa_override)
    out.append(CheckResult("diagonal term bounding (50 sets)", float(bad),
                           "0 violations", ok))
    return out
