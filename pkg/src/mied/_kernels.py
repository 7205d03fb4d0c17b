"""Backend selection for the pairwise kernels.

The compiled extension is used when it imports; setting ``MIED_PURE_PYTHON=1``
forces the numpy fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("MIED_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        pass

nn_dists = _impl.nn_dists
pair_exponents = _impl.pair_exponents
log_sum_and_grad = _impl.log_sum_and_grad
