import numpy as np

from mied.energy import log_energy
from mied.mollifiers import Mollifier


def random_instance(rng, family, max_n=4, max_N=10):
    n = int(rng.integers(1, max_n + 1))
    N = int(rng.integers(2, max_N + 1))
    X = rng.normal(size=(N, n))
    lp = rng.normal(size=N)
    eps = float(rng.uniform(0.3, 1.5))
    if family == "riesz":
        m = Mollifier.riesz(n + float(rng.uniform(0.1, 2.0)), eps)
    else:
        m = Mollifier(family, eps)
    return X, lp, m


def fd_energy_grad(X, target, m, nn, step=1e-5):
    """Central differences of the log-energy with nearest-neighbour distances frozen."""
    out = np.zeros_like(X)
    for i in range(X.shape[0]):
        for k in range(X.shape[1]):
            Xp, Xm = X.copy(), X.copy()
            Xp[i, k] += step
            Xm[i, k] -= step
            ep = log_energy(Xp, target.logp(Xp), m, nn_dists=nn).log_energy
            em = log_energy(Xm, target.logp(Xm), m, nn_dists=nn).log_energy
            out[i, k] = (ep - em) / (2 * step)
    return out


def fd_jacobian_t(f, U, cot, step=1e-6):
    """Row-wise J(U)^T cot for a row-wise map f, by central differences."""
    out = np.zeros_like(U)
    for k in range(U.shape[1]):
        Up, Um = U.copy(), U.copy()
        Up[:, k] += step
        Um[:, k] -= step
        dcol = (f(Up) - f(Um)) / (2 * step)
        out[:, k] = np.sum(dcol * cot, axis=1)
    return out
