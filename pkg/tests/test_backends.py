import importlib
import os
import subprocess
import sys

import numpy as np
import pytest

from mied import _kernels, _kernels_py

ckernels = pytest.importorskip("mied._ckernels")


@pytest.mark.parametrize("code,s,eps", [(0, 3.0, 0.2), (1, 0.0, 0.7), (2, 0.0, 0.5),
                                        (0, 2.0001, 1e-8)])
@pytest.mark.parametrize("diag", [True, False])
def test_compiled_matches_numpy(code, s, eps, diag):
    rng = np.random.default_rng(code * 10 + int(diag))
    X = rng.normal(size=(37, 3))
    lp = rng.normal(size=37)
    glp = rng.normal(size=(37, 3))
    dsq = (_kernels_py.nn_dists(X) / 1.4) ** 2 if diag else None
    a_lse, a_g = ckernels.log_sum_and_grad(X, lp, glp, code, s, eps, dsq)
    b_lse, b_g = _kernels_py.log_sum_and_grad(X, lp, glp, code, s, eps, dsq)
    assert a_lse == pytest.approx(b_lse, rel=1e-13, abs=1e-13)
    np.testing.assert_allclose(a_g, b_g, rtol=1e-11, atol=1e-13 * np.abs(b_g).max())
    np.testing.assert_allclose(ckernels.pair_exponents(X, lp, code, s, eps, dsq),
                               _kernels_py.pair_exponents(X, lp, code, s, eps, dsq), rtol=1e-13,
                               atol=1e-14)
    np.testing.assert_allclose(ckernels.nn_dists(X), _kernels_py.nn_dists(X), rtol=1e-15)


def test_default_backend_is_compiled():
    if os.environ.get("MIED_PURE_PYTHON"):
        pytest.skip("pure-python backend forced")
    assert _kernels.BACKEND == "cython"


def test_env_var_forces_fallback():
    out = subprocess.run([sys.executable, "-c", "import mied; print(mied.BACKEND)"],
                         env={**os.environ, "MIED_PURE_PYTHON": "1"}, capture_output=True,
                         text=True, check=True)
    assert out.stdout.strip() == "python"
    importlib.reload(_kernels)
