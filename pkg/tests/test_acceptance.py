"""Acceptance criteria 1-11, one test each.

Every test prints a ``[PASS]``/``[FAIL]`` line with the measured values and
runtime; the lines are also gathered into the terminal summary.
"""

import itertools
import math
import time

import numpy as np
import pytest

from mied import checks, cli, config, constraints as C, metrics, mollifiers as M
from mied import targets as T
from mied.energy import grad_log_energy, log_energy, nearest_neighbor_dists
from mied.optimizer import run_method

from .conftest import ACCEPTANCE_LINES
from .helpers import fd_energy_grad, random_instance


def report(n: int, ok: bool, detail: str, seconds: float) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail} ({seconds:.2f} s)"
    ACCEPTANCE_LINES.append(line)
    print(line)


def experiment(**overrides):
    raw = {k: str(v) for k, v in overrides.items()}
    return config.build(config.resolve(raw))


def run(exp, method="mied", constraint="default"):
    con = exp.constraint if constraint == "default" else constraint
    return run_method(method, exp.X0, exp.target, exp.mollifier, con, **exp.run_kwargs())


def test_criterion_01_mie_oracle():
    t0 = time.perf_counter()
    details, ok = [], True
    for mu, target in ((0.0, 1.0), (0.5, 1.0 + checks.gaussian_chi2(0.5))):
        chi2, vals = checks.mie_sweep(mu, 1.0)
        err = np.abs(vals - target)
        rel = err[-1] / target
        mono = bool(np.all(np.diff(err) <= 0))
        quad_ok = abs(chi2 + 1.0 - target) < 1e-6
        ok &= rel < 0.05 and mono and quad_ok
        details.append(f"mu={mu}: E={vals[-1]:.6f} vs {target:.6f} rel={rel:.2e} monotone={mono}")
    dt = time.perf_counter() - t0
    ok &= dt < 60
    report(1, ok, "; ".join(details), dt)
    assert ok


def test_criterion_02_riesz_ball_integral():
    t0 = time.perf_counter()
    worst = 0.0
    for n, s, b, eps in checks.RIESZ_CASES:
        val = M.riesz_ball_integral(n, s, b, eps)
        ref = checks.direct_riesz_ball(n, s, b, eps)
        worst = max(worst, abs(val - ref) / abs(ref))
    analytic = abs(M.riesz_ball_integral(1, 2.0, 0.0, 0.5) - math.pi) / math.pi
    dt = time.perf_counter() - t0
    ok = worst < 1e-4 and analytic < 1e-4 and dt < 5
    report(2, ok, f"max rel err {worst:.2e}, analytic case rel err {analytic:.2e}", dt)
    assert ok


def test_criterion_03_gradient_fd():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    fams = []
    for trial in range(20):
        fam = M.FAMILIES[trial % 3]
        X, _, m = random_instance(rng, fam, max_n=4, max_N=10)
        n = X.shape[1]
        if trial % 2 == 0:
            A = rng.normal(size=(n, n))
            tgt = T.gaussian_target(rng.normal(size=n), A @ A.T + n * np.eye(n))
        else:
            tgt = T.student_t_product(float(rng.uniform(1.5, 5)), np.eye(n) + 0.3 * rng.normal(size=(n, n)))
        g = grad_log_energy(X, tgt, m)
        fd = fd_energy_grad(X, tgt, m, nearest_neighbor_dists(X))
        worst = max(worst, float(np.max(np.abs(g - fd)) / np.max(np.abs(fd))))
        fams.append(fam)
    dt = time.perf_counter() - t0
    ok = worst < 1e-5 and set(fams) == set(M.FAMILIES) and dt < 10
    report(3, ok, f"max rel err {worst:.2e} over 20 instances", dt)
    assert ok


def test_criterion_04_diagonal_bounding():
    t0 = time.perf_counter()
    ok, bad = checks.diagonal_bounds_hold(np.random.default_rng(44), trials=50)
    dt = time.perf_counter() - t0
    ok = ok and dt < 5
    report(4, ok, f"{bad} ordering violations in 50 sets", dt)
    assert ok


def test_criterion_05_scale_invariance():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    tgt = T.gaussian_target(np.zeros(2), T.random_det1_covariance(2, 0))
    m = M.Mollifier.default_for_dim(2)
    identical = total = 0
    worst_rel = worst_shift = 0.0
    for _ in range(10):
        X = rng.normal(size=(50, 2))
        g0 = grad_log_energy(X, tgt, m)
        e0 = log_energy(X, tgt.logp(X), m).log_energy
        for c in (1.0, -3.7, 123.456, 1e-3, 1024.0):
            shifted = tgt.with_offset(c)
            g1 = grad_log_energy(X, shifted, m)
            e1 = log_energy(X, shifted.logp(X), m).log_energy
            total += 1
            identical += bool(np.array_equal(g0, g1))
            worst_rel = max(worst_rel, float(np.max(np.abs(g1 - g0)) / np.max(np.abs(g0))))
            worst_shift = max(worst_shift, abs((e1 - e0) + c))
    dt = time.perf_counter() - t0
    ok = identical == total and worst_shift < 1e-12
    report(5, ok, f"gradient bit-identical in {identical}/{total} shifts (max rel diff "
                  f"{worst_rel:.1e}); log-energy shift err {worst_shift:.1e}", dt)
    assert worst_shift < 1e-12
    assert identical == total


def test_criterion_06_gaussian_2d():
    t0 = time.perf_counter()
    exp = experiment(seed=0, **{"target.name": "gaussian", "target.dim": 2, "target.cov": "random",
                                "particles.n": 100, "particles.init": "uniform",
                                "particles.scale": 0.5, "optimizer.iters": 2000,
                                "optimizer.lr": 0.01, "optimizer.record_every": 2000,
                                "reference.n": 2000})
    tr = run(exp)
    w0, w1 = tr.rows[0].w2, tr.rows[-1].w2
    ed = tr.rows[-1].energy_dist
    dt = time.perf_counter() - t0
    ok = w1 < 0.25 * w0 and ed < 0.05 and dt < 120
    report(6, ok, f"W2 {w0:.4f} -> {w1:.4f} (ratio {w1 / w0:.3f}), energy dist {ed:.4f}", dt)
    assert ok


def test_criterion_07_uniform_box():
    t0 = time.perf_counter()
    exp = experiment(seed=0, **{"target.name": "box", "target.dim": 2, "constraint.type": "tanh",
                                "particles.n": 500, "optimizer.iters": 2000,
                                "optimizer.record_every": 2000})
    tanh_X = run(exp).particles
    sqrt_X = run(exp, constraint=C.sqrt_mirror_map()).particles
    inside = bool(np.all(np.abs(tanh_X) < 1.0))
    cov_tanh = float(np.abs(tanh_X).max())
    cov_sqrt = float(np.abs(sqrt_X).max())
    dt = time.perf_counter() - t0
    ok = inside and cov_tanh > 0.95 and cov_sqrt < 0.95 and dt < 120
    report(7, ok, f"tanh inside={inside} max|x|={cov_tanh:.4f}; sqrt-map max|x|={cov_sqrt:.4f}",
           dt)
    assert ok


def _brute_w2(X, Y):
    Cm = ((X[:, None] - Y[None]) ** 2).sum(-1)
    n = len(X)
    best = min(sum(Cm[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n)))
    return math.sqrt(best / n)


def test_criterion_08_w2_exact():
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(100):
        n, d = int(rng.integers(1, 7)), int(rng.integers(1, 4))
        X, Y = rng.normal(size=(n, d)), rng.normal(size=(n, d))
        worst = max(worst, abs(metrics.w2_exact(X, Y) - _brute_w2(X, Y)))
    axioms = True
    for _ in range(100):
        n, d = int(rng.integers(1, 7)), int(rng.integers(1, 4))
        A, B, Cc = (rng.normal(size=(n, d)) for _ in range(3))
        ab, bc, ac = metrics.w2_exact(A, B), metrics.w2_exact(B, Cc), metrics.w2_exact(A, Cc)
        axioms &= metrics.w2_exact(A, A[rng.permutation(n)]) <= 1e-12
        axioms &= abs(ab - metrics.w2_exact(B, A)) <= 1e-12 and ab >= 0
        axioms &= ac <= ab + bc + 1e-12
    dt = time.perf_counter() - t0
    ok = worst < 1e-9 and axioms and dt < 10
    report(8, ok, f"max |w2 - brute force| {worst:.1e}; metric axioms hold={axioms}", dt)
    assert ok


def test_criterion_09_dirichlet():
    t0 = time.perf_counter()
    exp = experiment(seed=0, **{"target.name": "dirichlet", "target.alpha": "1,1,1,1,1",
                                "constraint.type": "simplex", "particles.n": 50,
                                "optimizer.iters": 2000, "optimizer.record_every": 2000,
                                "reference.n": 2000})
    tr = run(exp)
    ed = tr.rows[-1].energy_dist
    dt = time.perf_counter() - t0
    ok = ed < 0.1 and dt < 60
    report(9, ok, f"energy dist {ed:.4f} (initial {tr.rows[0].energy_dist:.4f})", dt)
    assert ok


def test_criterion_10_logistic():
    t0 = time.perf_counter()
    exp = experiment(seed=0, **{"target.name": "logistic", "target.dim": 2,
                                "target.n_points": 200, "particles.n": 100,
                                "optimizer.iters": 2000, "optimizer.record_every": 2000})
    acc, w2 = {}, math.nan
    for method in ("mied", "svgd", "ipd"):
        tr = run(exp, method)
        acc[method] = T.test_accuracy(exp.dataset, tr.particles)
        if method == "mied":
            w2 = tr.rows[-1].w2
    dt = time.perf_counter() - t0
    ok = all(a >= 0.95 for a in acc.values()) and math.isfinite(w2) and dt < 120
    accs = ", ".join(f"{k}={v:.3f}" for k, v in acc.items())
    report(10, ok, f"test accuracy {accs}; MIED W2 to reference {w2:.4f}", dt)
    assert ok


@pytest.mark.parametrize("cmd", ["sample", "benchmark"])
def test_criterion_11_determinism(tmp_path, cmd):
    t0 = time.perf_counter()
    cfg = tmp_path / "d.cfg"
    cfg.write_text("seed = 11\ntarget.name = student_t\nparticles.n = 40\noptimizer.iters = 150\n"
                   "optimizer.record_every = 50\nreference.n = 300\nreference.box = 5\n"
                   "benchmark.methods = mied,svgd,ipd\n")
    cfg.write_text(cfg.read_text() + f"output.dir = {tmp_path / 'out'}\n")
    outputs = []
    for _ in range(2):
        assert cli.main([cmd, "--config", str(cfg)]) == 0
        outputs.append({p.name: p.read_bytes() for p in sorted((tmp_path / "out").iterdir())})
    same = outputs[0] == outputs[1] and len(outputs[0]) > 0
    dt = time.perf_counter() - t0
    report(11, same, f"{cmd}: {len(outputs[0])} files byte-identical across runs={same}", dt)
    assert same
