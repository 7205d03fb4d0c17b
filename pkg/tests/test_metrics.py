import itertools
import math

import numpy as np
import pytest

from mied.metrics import (box_restrict, compare, energy_distance, w2_empirical, w2_exact,
                          _w2_transport_lp)


def brute_w2(X, Y):
    C = ((X[:, None, :] - Y[None, :, :]) ** 2).sum(-1)
    n = len(X)
    return math.sqrt(min(sum(C[i, p[i]] for i in range(n))
                         for p in itertools.permutations(range(n))) / n)


def test_w2_examples():
    assert w2_exact(np.array([[0.0], [1.0]]), np.array([[1.0], [0.0]])) == 0.0
    assert w2_exact(np.array([[0.0], [0.0]]), np.array([[3.0], [4.0]])) == pytest.approx(
        math.sqrt(12.5))
    with pytest.raises(ValueError, match="size mismatch"):
        w2_exact(np.zeros((2, 1)), np.zeros((3, 1)))


def test_w2_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(30):
        n, d = int(rng.integers(1, 6)), int(rng.integers(1, 4))
        X, Y = rng.normal(size=(n, d)), rng.normal(size=(n, d))
        assert w2_exact(X, Y) == pytest.approx(brute_w2(X, Y), abs=1e-9)


def test_unequal_sizes_replication_vs_lp():
    rng = np.random.default_rng(1)
    X, Y = rng.normal(size=(6, 2)), rng.normal(size=(9, 2))
    assert w2_empirical(X, Y) == pytest.approx(_w2_transport_lp(X, Y), rel=1e-7)
    # 1-D closed form via quantile functions
    x, y = np.sort(rng.normal(size=4)), np.sort(rng.normal(size=8))
    ref = math.sqrt(np.mean((np.repeat(x, 2) - y) ** 2))
    assert w2_empirical(x, y) == pytest.approx(ref, rel=1e-12)


def test_energy_distance_properties():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(40, 2))
    assert energy_distance(X, X) == pytest.approx(0.0, abs=1e-12)
    Y = rng.normal(size=(50, 2)) + 1.0
    assert energy_distance(X, Y) > 0
    assert energy_distance(X, Y) == pytest.approx(energy_distance(Y, X), rel=1e-12)
    # 1-D two-point example: 2*1 - 0 - 0
    assert energy_distance([0.0], [1.0]) == pytest.approx(2.0)


def test_box_restrict_and_compare():
    X = np.array([[0.0, 0.0], [6.0, 0.0], [1.0, -4.9]])
    np.testing.assert_array_equal(box_restrict(X, 5.0), X[[0, 2]])
    rep = compare(X, X, box=5.0)
    assert rep.n_used_x == 2 and rep.w2 == 0.0
    with pytest.raises(ValueError):
        box_restrict(X, 0.0)


def _energy_distance_loops(X, Y):
    def mean_dist(A, B):
        return sum(math.dist(a, b) for a in A for b in B) / (len(A) * len(B))
    return 2 * mean_dist(X, Y) - mean_dist(X, X) - mean_dist(Y, Y)


def test_energy_distance_vs_double_loop_and_exact_symmetry():
    rng = np.random.default_rng(7)
    for _ in range(20):
        X = rng.normal(size=(int(rng.integers(1, 15)), 2))
        Y = rng.normal(size=(int(rng.integers(1, 15)), 2)) + 0.3
        ed = energy_distance(X, Y)
        assert ed == energy_distance(Y, X)
        assert ed == pytest.approx(_energy_distance_loops(X, Y), rel=1e-12, abs=1e-14)


def test_metrics_translation_and_permutation_invariant():
    rng = np.random.default_rng(9)
    X, Y = rng.normal(size=(6, 3)), rng.normal(size=(6, 3))
    v = rng.normal(size=3) * 5
    assert w2_exact(X + v, Y + v) == pytest.approx(w2_exact(X, Y), abs=1e-9)
    assert energy_distance(X + v, Y + v) == pytest.approx(energy_distance(X, Y), abs=1e-9)
    assert w2_exact(X[rng.permutation(6)], Y) == pytest.approx(w2_exact(X, Y), abs=1e-12)


def test_box_restrict_scan_oracle():
    X = np.random.default_rng(10).uniform(-3, 3, size=(200, 2))
    kept = [x for x in X if abs(x[0]) <= 1.5 and abs(x[1]) <= 1.5]
    np.testing.assert_array_equal(box_restrict(X, 1.5), np.array(kept))
    np.testing.assert_array_equal(box_restrict(X, 10.0), X)


def test_w2_simple_examples():
    assert w2_exact([[0.0]], [[3.0]]) == 3.0
    X = np.random.default_rng(11).normal(size=(5, 2))
    assert w2_exact(X, X[::-1]) == 0.0
