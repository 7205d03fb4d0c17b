import math

import numpy as np
import pytest

from mied import constraints as C
from mied import targets as T
from mied.mollifiers import Mollifier
from mied.optimizer import (AdamState, RunError, adam_step, init_particles, record_iterations,
                            run_baseline, run_method, run_mied)

GAUSS = T.gaussian_target(np.zeros(2), np.eye(2))
MOL = Mollifier.default_for_dim(2)


def test_adam_first_step():
    s = AdamState.zeros((1,), lr=0.01)
    s, upd = adam_step(s, [2.0])
    assert upd[0] == pytest.approx(-0.01 * 2.0 / (2.0 + 1e-8), rel=1e-12)
    assert s.t == 1


def test_adam_matches_reference_loop():
    rng = np.random.default_rng(0)
    grads = rng.normal(size=(20, 3))
    s = AdamState.zeros(3, lr=0.05)
    m = v = np.zeros(3)
    for t, g in enumerate(grads, start=1):
        s, upd = adam_step(s, g)
        m = 0.9 * m + 0.1 * g
        v = 0.999 * v + 0.001 * g * g
        ref = -0.05 * (m / (1 - 0.9 ** t)) / (np.sqrt(v / (1 - 0.999 ** t)) + 1e-8)
        np.testing.assert_allclose(upd, ref, rtol=1e-14)


def test_adam_diverged_and_shape():
    s = AdamState.zeros(2)
    with pytest.raises(FloatingPointError, match="diverged"):
        adam_step(s, [np.nan, 0.0])
    with pytest.raises(ValueError):
        adam_step(s, [1.0])


def test_record_iterations():
    assert record_iterations(10, 3) == [0, 3, 6, 9, 10]
    assert record_iterations(10, 5) == [0, 5, 10]
    assert record_iterations(0, 5) == [0]
    with pytest.raises(ValueError):
        record_iterations(10, 0)


def test_zero_iterations_returns_initial_state():
    X0 = init_particles(np.random.default_rng(0), 10, 2)
    tr = run_mied(X0, GAUSS, MOL, iters=0)
    np.testing.assert_array_equal(tr.particles, X0)
    assert len(tr.rows) == 1 and tr.rows[0].iter == 0


def test_mied_decreases_energy_and_records():
    X0 = init_particles(np.random.default_rng(1), 30, 2, "uniform", 0.5)
    tr = run_mied(X0, GAUSS, MOL, iters=300, record_every=100, timing=False)
    assert [r.iter for r in tr.rows] == [0, 100, 200, 300]
    le = tr.column("log_energy")
    assert le[-1] < le[0]
    assert all(math.isnan(r.w2) for r in tr.rows)
    assert all(r.elapsed_ms == 0.0 for r in tr.rows)


def test_runs_are_deterministic():
    X0 = init_particles(np.random.default_rng(2), 20, 2)
    a = run_mied(X0, GAUSS, MOL, iters=50).particles
    b = run_mied(X0, GAUSS, MOL, iters=50).particles
    np.testing.assert_array_equal(a, b)


def test_baselines_move_towards_target():
    X0 = init_particles(np.random.default_rng(3), 40, 2, center=[3.0, 3.0])
    ref = GAUSS.sample(np.random.default_rng(4), 400)
    for kind in ("svgd", "ipd"):
        tr = run_baseline(kind, X0, GAUSS, MOL, iters=400, lr=0.05, reference=ref)
        assert tr.rows[-1].w2 < tr.rows[0].w2
    # IPD collapses towards the mode
    tr = run_baseline("ipd", X0, GAUSS, MOL, iters=2000, lr=0.05)
    assert np.abs(tr.particles).max() < 0.05


def test_svgd_rejects_constraints_and_unknown_method():
    X0 = np.full((5, 2), 0.1) + np.arange(5)[:, None] * 0.01
    with pytest.raises(ValueError, match="unconstrained"):
        run_method("svgd", X0, T.uniform_box_target(2), MOL, C.tanh_box_map([-1, -1], [1, 1]),
                   iters=1)
    with pytest.raises(ValueError):
        run_baseline("langevin", X0, GAUSS, MOL, iters=1)


def test_escape_reports_iteration():
    X0 = np.array([[0.2, 0.1], [-0.3, 0.4], [0.5, -0.5]])
    with pytest.raises(RunError) as info:
        run_method("ipd", X0 * 10, T.uniform_box_target(2), MOL, iters=5)
    assert info.value.iteration == 0


def test_barrier_keeps_particles_near_ball():
    X0 = init_particles(np.random.default_rng(5), 40, 2, scale=0.3)
    ball = C.ball_constraint(1.0)
    tr = run_mied(X0, GAUSS, MOL, ball, iters=500, lr=0.02)
    r = np.linalg.norm(tr.particles, axis=1)
    assert r.max() < 1.1


def test_reparameterized_mied_stays_in_simplex():
    t = T.dirichlet_target(np.ones(3))
    X0 = np.random.default_rng(6).dirichlet(np.full(3, 5.0), size=20)[:, :-1]
    tr = run_mied(X0, t, Mollifier.default_for_dim(2), C.simplex_map(3), iters=200)
    assert np.all(tr.particles > 0) and np.all(tr.particles.sum(1) < 1)


def _scalar_adam(gs, lr, b1=0.9, b2=0.999, eps=1e-8):
    m = v = 0.0
    out = []
    for t, g in enumerate(gs, start=1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        out.append(-lr * (m / (1 - b1 ** t)) / (math.sqrt(v / (1 - b2 ** t)) + eps))
    return out


def test_adam_three_step_scalar_trace_and_zero_grads():
    s = AdamState.zeros((1, 1), lr=0.1)
    got = []
    for _ in range(3):
        s, upd = adam_step(s, np.ones((1, 1)))
        got.append(upd[0, 0])
    np.testing.assert_allclose(got, _scalar_adam([1.0] * 3, 0.1), rtol=0, atol=1e-12)
    z = AdamState.zeros((2, 2))
    for _ in range(5):
        z, upd = adam_step(z, np.zeros((2, 2)))
        np.testing.assert_array_equal(upd, 0.0)


def test_traces_bit_identical():
    X0 = init_particles(np.random.default_rng(8), 15, 2)
    ref = GAUSS.sample(np.random.default_rng(9), 60)
    a = run_mied(X0, GAUSS, MOL, iters=30, record_every=10, reference=ref, timing=False)
    b = run_mied(X0, GAUSS, MOL, iters=30, record_every=10, reference=ref, timing=False)
    assert a.rows == b.rows
