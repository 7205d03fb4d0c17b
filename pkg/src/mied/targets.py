"""Built-in unnormalized target densities and the logistic-regression data path.

Every target exposes ``logp_and_grad(X)`` on an ``(N, dim)`` batch, returning
``(N,)`` log-densities (``-inf`` outside the support) and ``(N, dim)``
gradients. Targets with a tractable sampler also implement ``sample``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import linalg, special

VARIANCE_FLOOR = 1e-12


class TargetDensity:
    dim: int
    descriptor: str = "target"

    def logp_and_grad(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def logp(self, X) -> np.ndarray:
        return self.logp_and_grad(_batch(X, self.dim))[0]

    def grad_logp(self, X) -> np.ndarray:
        return self.logp_and_grad(_batch(X, self.dim))[1]

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError(f"{self.descriptor} has no exact sampler")

    def with_offset(self, c: float) -> TargetDensity:
        """Same target with log p shifted by ``c`` (p scaled by e^c)."""
        return _Shifted(self, float(c))

    def __repr__(self):
        return f"<{self.descriptor} dim={self.dim}>"


def _batch(X, dim):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, dim) if X.shape[0] == dim else X[:, None]
    if X.shape[1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got {X.shape[1]}")
    return X


class _Shifted(TargetDensity):
    def __init__(self, base, c):
        self.base, self.c = base, c
        self.dim = base.dim
        self.descriptor = f"{base.descriptor}+{c!r}"

    def logp_and_grad(self, X):
        lp, g = self.base.logp_and_grad(X)
        return lp + self.c, g

    def sample(self, rng, size):
        return self.base.sample(rng, size)


class GaussianTarget(TargetDensity):
    def __init__(self, mean, cov):
        self.mean = np.atleast_1d(np.asarray(mean, dtype=float))
        self.cov = np.atleast_2d(np.asarray(cov, dtype=float))
        self.dim = self.mean.shape[0]
        if self.cov.shape != (self.dim, self.dim):
            raise ValueError("covariance shape does not match mean")
        if not np.allclose(self.cov, self.cov.T):
            raise ValueError("covariance must be symmetric positive definite")
        try:
            self._chol = linalg.cho_factor(self.cov, lower=True)
        except linalg.LinAlgError as exc:
            raise ValueError("covariance must be symmetric positive definite") from exc
        self._L = np.linalg.cholesky(self.cov)
        self.precision = linalg.cho_solve(self._chol, np.eye(self.dim))
        self.descriptor = f"gaussian{self.dim}d"

    def logp_and_grad(self, X):
        D = X - self.mean
        PD = D @ self.precision
        return -0.5 * np.einsum("ij,ij->i", D, PD), -PD

    def sample(self, rng, size):
        return self.mean + rng.standard_normal((size, self.dim)) @ self._L.T


def gaussian_target(mean, cov) -> GaussianTarget:
    return GaussianTarget(mean, cov)


def random_det1_covariance(n: int, seed) -> np.ndarray:
    """Random SPD matrix with unit determinant.

    Draws a square-root factor with i.i.d. U[-1, 1] entries and rescales
    ``S S^T`` by ``|det S|^(2/n)``.
    """
    if n < 1:
        raise ValueError("dimension must be >= 1")
    rng = np.random.default_rng(seed)
    while True:
        S = rng.uniform(-1.0, 1.0, size=(n, n))
        sign, logdet = np.linalg.slogdet(S)
        if sign != 0 and logdet > -30:
            break
    A = (S @ S.T) * np.exp(-2.0 * logdet / n)
    A = 0.5 * (A + A.T)
    det = np.linalg.det(A)
    assert abs(det - 1.0) <= 1e-6, det
    return A


class StudentTProduct(TargetDensity):
    """Product of independent Student-t coordinates pushed through a linear map."""

    def __init__(self, nu: float, transform):
        self.nu = float(nu)
        if self.nu <= 0:
            raise ValueError("degrees of freedom must be positive")
        self.transform = np.atleast_2d(np.asarray(transform, dtype=float))
        self.dim = self.transform.shape[0]
        if self.transform.shape != (self.dim, self.dim):
            raise ValueError("transform must be square")
        if np.linalg.cond(self.transform) > 1e12:
            raise ValueError("transform must be invertible")
        self.inv = np.linalg.inv(self.transform)
        self.descriptor = f"student_t{self.dim}d(nu={self.nu:g})"

    def logp_and_grad(self, X):
        U = X @ self.inv.T
        nu = self.nu
        lp = -0.5 * (nu + 1.0) * np.log1p(U * U / nu).sum(axis=1)
        gu = -(nu + 1.0) * U / (nu + U * U)
        return lp, gu @ self.inv

    def sample(self, rng, size):
        return rng.standard_t(self.nu, size=(size, self.dim)) @ self.transform.T


DEFAULT_T_TRANSFORM = np.array([[1.0, 0.5], [0.5, 1.0]])


def student_t_product(nu: float = 2.0, transform=DEFAULT_T_TRANSFORM) -> StudentTProduct:
    return StudentTProduct(nu, transform)


class UniformBox(TargetDensity):
    def __init__(self, n: int):
        self.dim = int(n)
        self.descriptor = f"uniform_box{self.dim}d"
        self.domain = "box"

    def logp_and_grad(self, X):
        inside = np.all(np.abs(X) < 1.0, axis=1)
        return np.where(inside, 0.0, -np.inf), np.zeros_like(X)

    def sample(self, rng, size):
        return rng.uniform(-1.0, 1.0, size=(size, self.dim))


def uniform_box_target(n: int) -> UniformBox:
    return UniformBox(n)


class Dirichlet(TargetDensity):
    """Dirichlet density in the first K-1 simplex coordinates."""

    def __init__(self, alpha):
        self.alpha = np.asarray(alpha, dtype=float)
        if self.alpha.ndim != 1 or self.alpha.shape[0] < 2 or np.any(self.alpha <= 0):
            raise ValueError("alpha must be a positive vector of length >= 2")
        self.K = self.alpha.shape[0]
        self.dim = self.K - 1
        self.descriptor = f"dirichlet{self.K}"
        self.domain = "simplex"

    def logp_and_grad(self, X):
        a, aK = self.alpha[:-1] - 1.0, self.alpha[-1] - 1.0
        last = 1.0 - X.sum(axis=1)
        inside = np.all(X > 0, axis=1) & (last > 0)
        lp = np.full(X.shape[0], -np.inf)
        grad = np.zeros_like(X)
        Xi, Li = X[inside], last[inside]
        lp[inside] = np.log(Xi) @ a + aK * np.log(Li)
        grad[inside] = a / Xi - (aK / Li)[:, None]
        return lp, grad

    def sample(self, rng, size):
        return rng.dirichlet(self.alpha, size=size)[:, :-1]


def dirichlet_target(alpha) -> Dirichlet:
    return Dirichlet(alpha)


@dataclass
class LabeledDataset:
    features: np.ndarray
    labels: np.ndarray
    train: np.ndarray
    test: np.ndarray
    columns: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=float)
        if not np.all(np.isfinite(self.features)):
            raise ValueError("features contain non-finite entries")
        if not np.all(np.isin(self.labels, (-1.0, 1.0))):
            raise ValueError("labels must be -1 or +1")
        M = self.features.shape[0]
        both = np.concatenate([self.train, self.test])
        if both.shape[0] != M or not np.array_equal(np.sort(both), np.arange(M)):
            raise ValueError("train/test split must partition the rows")

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def augmented(self, idx) -> np.ndarray:
        F = self.features[idx]
        return np.hstack([F, np.ones((F.shape[0], 1))])


class LogisticPosterior(TargetDensity):
    """Posterior over bias-augmented weights with an isotropic Gaussian prior."""

    def __init__(self, ds: LabeledDataset, prior_std: float = 1.0):
        if ds.train.size == 0:
            raise ValueError("training set is empty")
        if prior_std <= 0:
            raise ValueError("prior_std must be positive")
        self.ds = ds
        self.prior_std = float(prior_std)
        self.Z = ds.augmented(ds.train) * ds.labels[ds.train][:, None]
        self.dim = ds.d + 1
        self.descriptor = f"logistic{self.dim}d"

    def logp_and_grad(self, W):
        if W.shape[1] != self.dim:
            raise ValueError(f"weights must have dimension {self.dim}")
        margins = W @ self.Z.T
        loglik = -np.logaddexp(0.0, -margins).sum(axis=1)
        s2 = self.prior_std ** 2
        lp = loglik - 0.5 * np.einsum("ij,ij->i", W, W) / s2
        grad = special.expit(-margins) @ self.Z - W / s2
        return lp, grad

    def neg_hessian(self, w) -> np.ndarray:
        m = self.Z @ w
        s = special.expit(m) * special.expit(-m)
        return (self.Z * s[:, None]).T @ self.Z + np.eye(self.dim) / self.prior_std ** 2


def logistic_regression_target(ds: LabeledDataset, prior_std: float = 1.0) -> LogisticPosterior:
    return LogisticPosterior(ds, prior_std)


def _split(M, split_fraction, seed):
    if not 0 < split_fraction < 1:
        raise ValueError("split_fraction must lie in (0, 1)")
    perm = np.random.default_rng(seed).permutation(M)
    n_train = int(round(split_fraction * M))
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def _standardize(F, train):
    mu = F[train].mean(axis=0)
    sd = np.sqrt(np.maximum(F[train].var(axis=0), VARIANCE_FLOOR))
    return (F - mu) / sd


def make_dataset(features, labels01, split_fraction=0.8, seed=0, columns=None) -> LabeledDataset:
    """Build a standardized, split dataset from raw features and {0,1} or {-1,1} labels."""
    F = np.asarray(features, dtype=float)
    y = np.asarray(labels01, dtype=float)
    y = np.where(y == 0, -1.0, y)
    train, test = _split(F.shape[0], split_fraction, seed)
    return LabeledDataset(_standardize(F, train), y, train, test, list(columns or []))


def load_csv_dataset(path, label_column: str, split_fraction: float = 0.8,
                     seed=0) -> LabeledDataset:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"dataset file not found: {path}")
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header, body = [h.strip() for h in rows[0]], [r for r in rows[1:] if r]
    if label_column not in header:
        raise ValueError(f"{path}: no column named {label_column!r}")
    li = header.index(label_column)
    feats, labels = [], []
    for lineno, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise ValueError(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
        try:
            vals = [float(c) for c in row]
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: non-numeric cell ({exc})") from None
        lab = vals.pop(li)
        if lab not in (0.0, 1.0, -1.0):
            raise ValueError(f"{path}:{lineno}: unknown label value {row[li]!r}")
        feats.append(vals)
        labels.append(lab)
    if not feats:
        raise ValueError(f"{path}: no data rows")
    cols = [h for i, h in enumerate(header) if i != li]
    return make_dataset(np.array(feats), np.array(labels), split_fraction, seed, cols)


def synthetic_separable(n_points: int, seed, d: int = 2, margin: float = 0.5,
                        split_fraction: float = 0.8) -> LabeledDataset:
    """Linearly separable points: label = sign(w.x + b) with a margin gap."""
    rng = np.random.default_rng(seed)
    w = rng.normal(size=d)
    w /= np.linalg.norm(w)
    F = np.empty((0, d))
    while F.shape[0] < n_points:
        cand = rng.normal(size=(2 * n_points, d)) * 2.0
        cand = cand[np.abs(cand @ w + 0.3) > margin]
        F = np.vstack([F, cand])
    F = F[:n_points]
    y = np.where(F @ w + 0.3 > 0, 1.0, -1.0)
    return make_dataset(F, y, split_fraction, seed)


def predictive_mean(ds: LabeledDataset, W, idx=None) -> np.ndarray:
    idx = ds.test if idx is None else idx
    W = np.atleast_2d(np.asarray(W, dtype=float))
    if W.shape[1] != ds.d + 1:
        raise ValueError("particle dimension does not match dataset")
    return special.expit(ds.augmented(idx) @ W.T).mean(axis=1)


def test_accuracy(ds: LabeledDataset, W) -> float:
    """Accuracy of the particle-averaged predictive probability on the test split."""
    if ds.test.size == 0:
        raise ValueError("test set is empty")
    pred = np.where(predictive_mean(ds, W) > 0.5, 1.0, -1.0)
    return float(np.mean(pred == ds.labels[ds.test]))


# keep pytest from collecting the accuracy helper when star-imported in tests
test_accuracy.__test__ = False
