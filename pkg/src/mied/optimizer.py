"""Adam and the particle descent loops (MIED, SVGD, IPD)."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import metrics
from .baseline_kernels import median_heuristic, svgd_direction
from .constraints import InequalityConstraint, ReparamMap, dynamic_barrier_direction
from .energy import DIAG_NN, log_energy_and_grad
from .mollifiers import Mollifier

MIED = "mied"
SVGD = "svgd"
IPD = "ipd"
METHODS = (MIED, SVGD, IPD)


class RunError(RuntimeError):
    def __init__(self, iteration: int, cause: Exception):
        super().__init__(f"iteration {iteration}: {cause}")
        self.iteration = iteration
        self.cause = cause


@dataclass(frozen=True)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps_hat: float = 1e-8

    @classmethod
    def zeros(cls, shape, lr=0.01, **kw) -> AdamState:
        return cls(np.zeros(shape), np.zeros(shape), 0, lr, **kw)


def adam_step(state: AdamState, grads) -> tuple[AdamState, np.ndarray]:
    """One bias-corrected Adam step; returns the new state and the additive update."""
    g = np.asarray(grads, dtype=float)
    if g.shape != state.m.shape:
        raise ValueError(f"gradient shape {g.shape} != state shape {state.m.shape}")
    if not np.all(np.isfinite(g)):
        raise FloatingPointError("diverged")
    t = state.t + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * g
    v = state.beta2 * state.v + (1.0 - state.beta2) * (g * g)
    m_hat = m / (1.0 - state.beta1 ** t)
    v_hat = v / (1.0 - state.beta2 ** t)
    update = -state.lr * m_hat / (np.sqrt(v_hat) + state.eps_hat)
    return replace(state, m=m, v=v, t=t), update


@dataclass
class TraceRow:
    iter: int
    log_energy: float
    w2: float
    energy_dist: float
    elapsed_ms: float


@dataclass
class RunTrace:
    method: str
    rows: list[TraceRow] = field(default_factory=list)
    particles: np.ndarray | None = None

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])


def record_iterations(iters: int, record_every: int) -> list[int]:
    """Iteration indices at which the state is recorded: 0, every k-th, and the last."""
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    its = list(range(0, iters + 1, record_every))
    if its[-1] != iters:
        its.append(iters)
    return its


def init_particles(rng: np.random.Generator, N: int, n: int, kind: str = "normal",
                   scale: float = 1.0, center=None) -> np.ndarray:
    if kind == "normal":
        X = scale * rng.standard_normal((N, n))
    elif kind == "uniform":
        X = rng.uniform(-scale, scale, size=(N, n))
    else:
        raise ValueError(f"unknown initialization {kind!r}")
    return X if center is None else X + np.asarray(center, dtype=float)


class _Problem:
    """Maps optimization coordinates to domain positions and descent gradients."""

    def __init__(self, method, target, mollifier, constraint, diag):
        self.method, self.target, self.mollifier = method, target, mollifier
        self.constraint, self.diag = constraint, diag
        self.reparam = constraint if isinstance(constraint, ReparamMap) else None
        self.barrier = constraint if isinstance(constraint, InequalityConstraint) else None
        if method == SVGD and constraint is not None:
            raise ValueError("SVGD baseline supports unconstrained targets only")
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}")

    def to_opt(self, X):
        if self.reparam is None:
            return X.copy()
        if self.reparam.inverse is None:
            raise ValueError(f"{self.reparam.descriptor} has no inverse for initialization")
        return self.reparam.inverse(X)

    def positions(self, U):
        return U if self.reparam is None else self.reparam.forward(U)

    def descent_grad(self, U):
        """Gradient (in optimization coordinates) of the quantity being minimized."""
        X = self.positions(U)
        if self.method == MIED:
            _, gx = log_energy_and_grad(X, self.target, self.mollifier, diag=self.diag)
        else:
            lp, glp = self.target.logp_and_grad(X)
            if np.any(np.isneginf(lp)):
                raise ValueError("particle escaped support")
            if self.method == IPD:
                gx = -glp
            else:
                gx = -svgd_direction(X, glp, median_heuristic(X))
        if self.barrier is not None:
            c = self.barrier
            gx = dynamic_barrier_direction(gx, c.g(X), c.grad_g(X), c.alpha)
        if self.reparam is not None:
            return self.reparam.pullback(U, gx)
        return gx


def _run(method, X0, target, mollifier, constraint, *, iters, lr, record_every,
         reference=None, metric_box=None, timing=True, diag=DIAG_NN,
         adam_kw=None) -> RunTrace:
    X0 = np.asarray(X0, dtype=float)
    if X0.ndim != 2 or X0.shape[1] != target.dim:
        raise ValueError(f"initial particles must have shape (N, {target.dim})")
    if iters < 0:
        raise ValueError("iters must be >= 0")
    mollifier.check_dim(target.dim)
    prob = _Problem(method, target, mollifier, constraint, diag)
    U = prob.to_opt(X0)
    state = AdamState.zeros(U.shape, lr=lr, **(adam_kw or {}))
    trace = RunTrace(method)
    record_at = set(record_iterations(iters, record_every))
    elapsed = 0.0

    def record(t):
        X = prob.positions(U)
        le = math.nan
        if X.shape[0] >= 2:
            try:
                le = log_energy_and_grad(X, target, mollifier, diag=diag)[0]
            except ValueError as exc:
                raise RunError(t, exc) from exc
        if reference is not None:
            rep = metrics.compare(X, reference, box=metric_box)
            w2, ed = rep.w2, rep.energy_dist
        else:
            w2 = ed = math.nan
        trace.rows.append(TraceRow(t, float(le), w2, ed, elapsed * 1e3 if timing else 0.0))

    for t in range(iters + 1):
        if t in record_at:
            record(t)
        if t == iters:
            break
        t0 = time.perf_counter()
        try:
            g = prob.descent_grad(U)
            state, upd = adam_step(state, g)
        except (ValueError, FloatingPointError) as exc:
            raise RunError(t, exc) from exc
        U = U + upd
        elapsed += time.perf_counter() - t0
    trace.particles = prob.positions(U)
    return trace


def run_mied(X0, target, mollifier: Mollifier, constraint=None, *, iters: int, lr: float = 0.01,
             record_every: int = 100, **kw) -> RunTrace:
    """Adam descent on the log-domain interaction energy.

    ``X0`` is given in domain coordinates; with a reparameterization map it
    is pulled back through the map's inverse.
    """
    return _run(MIED, X0, target, mollifier, constraint, iters=iters, lr=lr,
                record_every=record_every, **kw)


def run_baseline(kind: str, X0, target, mollifier: Mollifier, constraint=None, *, iters: int,
                 lr: float = 0.01, record_every: int = 100, **kw) -> RunTrace:
    """SVGD or IPD under the same loop; ``mollifier`` is only used for recording."""
    kind = kind.lower()
    if kind not in (SVGD, IPD):
        raise ValueError(f"unknown baseline {kind!r}")
    return _run(kind, X0, target, mollifier, constraint, iters=iters, lr=lr,
                record_every=record_every, **kw)


def run_method(kind: str, X0, target, mollifier, constraint=None, **kw) -> RunTrace:
    if kind.lower() == MIED:
        return run_mied(X0, target, mollifier, constraint, **kw)
    return run_baseline(kind, X0, target, mollifier, constraint, **kw)
