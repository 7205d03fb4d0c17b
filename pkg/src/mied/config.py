"""Flat ``section.key = value`` run configuration and the objects it builds.

A resolved config (every default filled in) is echoed at the top of each
output CSV as ``#! key = value`` lines; :func:`load_config` accepts either a
config file or such a CSV, so any output can be re-run from its header.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import constraints as C
from . import targets as T
from .mollifiers import FAMILIES, Mollifier
from .optimizer import METHODS, IPD, init_particles, run_baseline

ECHO_PREFIX = "#! "


class ConfigError(ValueError):
    pass


# key -> default; None marks a required key, "" an optional one
DEFAULTS: dict[str, str | None] = {
    "seed": None,
    "method": "mied",
    "target.name": None,
    "target.dim": "2",
    "target.mean": "0",
    "target.cov": "random",
    "target.nu": "2",
    "target.transform": "1,0.5;0.5,1",
    "target.alpha": "1,1,1,1,1",
    "target.data": "",
    "target.label_column": "label",
    "target.split": "0.8",
    "target.n_points": "200",
    "target.prior_std": "1",
    "mollifier.family": "riesz",
    "mollifier.s": "",
    "mollifier.epsilon": "1e-8",
    "constraint.type": "none",
    "constraint.lo": "-1",
    "constraint.hi": "1",
    "constraint.alpha": "1",
    "constraint.radius": "1",
    "constraint.normal": "1",
    "constraint.offset": "0",
    "optimizer.iters": "200",
    "optimizer.lr": "0.01",
    "optimizer.record_every": "100",
    "particles.n": "100",
    "particles.init": "",
    "particles.scale": "",
    "reference.n": "2000",
    "reference.box": "",
    "reference.ipd_iters": "5000",
    "output.dir": ".",
    "output.trace": "trace.csv",
    "output.samples": "samples.csv",
    "output.comparison": "comparison.csv",
    "output.timing": "false",
    "benchmark.methods": "mied,svgd,ipd",
}

TARGETS = ("gaussian", "student_t", "box", "dirichlet", "logistic")
CONSTRAINTS = ("none", "tanh", "sqrt", "simplex", "ball", "halfspace")


def parse_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith(ECHO_PREFIX.strip()):
            line = line[len(ECHO_PREFIX.strip()):].strip()
        elif not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = value
    return out


def load_config(path) -> dict[str, str]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if text.startswith(ECHO_PREFIX.strip()):
        # echoed CSV header: keep only the leading '#!' block
        lines = []
        for line in text.splitlines():
            if not line.startswith(ECHO_PREFIX.strip()):
                break
            lines.append(line)
        text = "\n".join(lines)
    return parse_text(text)


def resolve(raw: dict[str, str]) -> dict[str, str]:
    """Fill defaults and validate names; returns every key."""
    cfg = {k: raw.get(k, v) for k, v in DEFAULTS.items()}
    missing = [k for k, v in cfg.items() if v is None]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    if cfg["target.name"] not in TARGETS:
        raise ConfigError(f"unknown target {cfg['target.name']!r}")
    if cfg["mollifier.family"] not in FAMILIES:
        raise ConfigError(f"unknown mollifier family {cfg['mollifier.family']!r}")
    if cfg["constraint.type"] not in CONSTRAINTS:
        raise ConfigError(f"unknown constraint type {cfg['constraint.type']!r}")
    for m in [cfg["method"], *split_list(cfg["benchmark.methods"])]:
        if m not in METHODS:
            raise ConfigError(f"unknown method {m!r}")
    _int(cfg, "seed")
    name, ctype = cfg["target.name"], cfg["constraint.type"]
    if name in ("box", "dirichlet") and ctype == "none":
        raise ConfigError("target requires constraint handling")
    if name == "dirichlet" and ctype not in ("simplex",):
        raise ConfigError("dirichlet target needs constraint.type = simplex")
    if not cfg["particles.init"]:
        cfg["particles.init"] = {"box": "uniform", "dirichlet": "dirichlet"}.get(name, "normal")
    if not cfg["particles.scale"]:
        cfg["particles.scale"] = {"uniform": "0.5", "dirichlet": "5"}.get(cfg["particles.init"], "1")
    return cfg


def echo_lines(cfg: dict[str, str]) -> list[str]:
    return [f"{ECHO_PREFIX}{k} = {cfg[k]}" for k in sorted(cfg)]


def split_list(s: str) -> list[str]:
    return [p.strip() for p in s.split(",") if p.strip()]


def _floats(s: str) -> np.ndarray:
    try:
        return np.array([float(p) for p in split_list(s)])
    except ValueError as exc:
        raise ConfigError(f"expected numbers, got {s!r}") from exc


def _matrix(s: str) -> np.ndarray:
    rows = [_floats(r) for r in s.split(";")]
    if len({len(r) for r in rows}) != 1:
        raise ConfigError(f"ragged matrix {s!r}")
    return np.vstack(rows)


def _int(cfg, key) -> int:
    try:
        return int(cfg[key])
    except ValueError as exc:
        raise ConfigError(f"{key}: expected an integer, got {cfg[key]!r}") from exc


def _float(cfg, key) -> float:
    try:
        return float(cfg[key])
    except ValueError as exc:
        raise ConfigError(f"{key}: expected a number, got {cfg[key]!r}") from exc


def _bool(cfg, key) -> bool:
    v = cfg[key].lower()
    if v not in ("true", "false", "1", "0", "yes", "no"):
        raise ConfigError(f"{key}: expected true/false, got {cfg[key]!r}")
    return v in ("true", "1", "yes")


def _broadcast(vec, n, key):
    if vec.size == 1:
        return np.full(n, vec[0])
    if vec.size != n:
        raise ConfigError(f"{key}: expected {n} values, got {vec.size}")
    return vec


@dataclass
class Experiment:
    cfg: dict[str, str]
    target: T.TargetDensity
    mollifier: Mollifier
    constraint: object
    X0: np.ndarray
    reference: np.ndarray
    dataset: T.LabeledDataset | None = None

    @property
    def iters(self) -> int:
        return _int(self.cfg, "optimizer.iters")

    def run_kwargs(self) -> dict:
        box = self.cfg["reference.box"]
        return dict(
            iters=self.iters,
            lr=_float(self.cfg, "optimizer.lr"),
            record_every=_int(self.cfg, "optimizer.record_every"),
            reference=self.reference,
            metric_box=float(box) if box else None,
            timing=_bool(self.cfg, "output.timing"),
        )


def _streams(seed: int):
    cov, data, init, ref = np.random.SeedSequence(seed).spawn(4)
    return cov, data, np.random.default_rng(init), np.random.default_rng(ref)


def _build_target(cfg, cov_seed, data_seed):
    name = cfg["target.name"]
    n = _int(cfg, "target.dim")
    if n < 1:
        raise ConfigError("target.dim must be >= 1")
    if name == "gaussian":
        mean = _broadcast(_floats(cfg["target.mean"]), n, "target.mean")
        cov_kind = cfg["target.cov"]
        if cov_kind == "random":
            cov = T.random_det1_covariance(n, cov_seed)
        elif cov_kind == "identity":
            cov = np.eye(n)
        else:
            cov = _matrix(cov_kind)
        return T.gaussian_target(mean, cov), None
    if name == "student_t":
        return T.student_t_product(_float(cfg, "target.nu"), _matrix(cfg["target.transform"])), None
    if name == "box":
        return T.uniform_box_target(n), None
    if name == "dirichlet":
        return T.dirichlet_target(_floats(cfg["target.alpha"])), None
    split = _float(cfg, "target.split")
    if cfg["target.data"]:
        ds = T.load_csv_dataset(cfg["target.data"], cfg["target.label_column"], split,
                                data_seed)
    else:
        ds = T.synthetic_separable(_int(cfg, "target.n_points"), data_seed, d=n,
                                   split_fraction=split)
    return T.logistic_regression_target(ds, _float(cfg, "target.prior_std")), ds


def _build_constraint(cfg, dim):
    ctype = cfg["constraint.type"]
    if ctype == "none":
        return None
    if ctype == "tanh":
        return C.tanh_box_map(_broadcast(_floats(cfg["constraint.lo"]), dim, "constraint.lo"),
                              _broadcast(_floats(cfg["constraint.hi"]), dim, "constraint.hi"))
    if ctype == "sqrt":
        return C.sqrt_mirror_map()
    if ctype == "simplex":
        return C.simplex_map(dim + 1)
    alpha = _float(cfg, "constraint.alpha")
    if ctype == "ball":
        return C.ball_constraint(_float(cfg, "constraint.radius"), alpha=alpha)
    normal = _broadcast(_floats(cfg["constraint.normal"]), dim, "constraint.normal")
    return C.halfspace_constraint(normal, _float(cfg, "constraint.offset"), alpha=alpha)


def _logistic_reference(target, size, iters, rng):
    """Gaussian around a long-run IPD mode, with inverse-Hessian covariance."""
    start = np.zeros((1, target.dim))
    mode = run_baseline(IPD, start, target, Mollifier.gaussian(1.0), iters=iters,
                        lr=0.01, record_every=max(iters, 1)).particles[0]
    cov = np.linalg.inv(target.neg_hessian(mode))
    return rng.multivariate_normal(mode, 0.5 * (cov + cov.T), size=size)


def build(cfg: dict[str, str]) -> Experiment:
    seed = _int(cfg, "seed")
    cov_seed, data_seed, init_rng, ref_rng = _streams(seed)
    try:
        target, ds = _build_target(cfg, cov_seed, data_seed)
        dim = target.dim
        s = float(cfg["mollifier.s"]) if cfg["mollifier.s"] else dim + 1e-4
        fam = cfg["mollifier.family"]
        eps = _float(cfg, "mollifier.epsilon")
        mol = Mollifier.riesz(s, eps) if fam == "riesz" else Mollifier(fam, eps)
        mol.check_dim(dim)
        constraint = _build_constraint(cfg, dim)
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc)) from exc
    cfg["mollifier.s"] = repr(s) if fam == "riesz" else cfg["mollifier.s"]

    N = _int(cfg, "particles.n")
    scale = _float(cfg, "particles.scale")
    kind = cfg["particles.init"]
    if N < 2:
        raise ConfigError("particles.n must be >= 2")
    if kind == "dirichlet":
        X0 = init_rng.dirichlet(np.full(dim + 1, scale), size=N)[:, :-1]
    else:
        try:
            X0 = init_particles(init_rng, N, dim, kind, scale)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    n_ref = _int(cfg, "reference.n")
    if ds is not None:
        reference = _logistic_reference(target, n_ref, _int(cfg, "reference.ipd_iters"), ref_rng)
    else:
        reference = target.sample(ref_rng, n_ref)
    if cfg["reference.box"] and not math.isfinite(_float(cfg, "reference.box")):
        raise ConfigError("reference.box must be finite")
    return Experiment(cfg, target, mol, constraint, X0, reference, ds)
