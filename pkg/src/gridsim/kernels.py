"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it was built; otherwise the
pure-Python ``_pykernels`` module is loaded. Set ``GRIDSIM_PURE_PYTHON=1`` to
force the fallback (used by the benchmark and the backend-equivalence tests).
"""
import os

from . import _pykernels

if os.environ.get("GRIDSIM_PURE_PYTHON") == "1":
    _backend = _pykernels
else:
    try:
        from . import _ckernels as _backend
    except ImportError:  # extension not built
        _backend = _pykernels

BACKEND = "cython" if _backend is not _pykernels else "python"

OK = _pykernels.OK
NO_CONVERGENCE = _pykernels.NO_CONVERGENCE
OVERFLOW = _pykernels.OVERFLOW
EXP_ARG_LIMIT = _pykernels.EXP_ARG_LIMIT

pv_residual = _backend.pv_residual
pv_residual_prime = _backend.pv_residual_prime
pv_solve_current = _backend.pv_solve_current
pv_solve_many = _backend.pv_solve_many
rl_period = _backend.rl_period
