"""Pick the compiled pairwise core if it is importable, else the numpy one."""

import os

if os.environ.get("GMMCRAMER_PURE", "") not in ("", "0"):
    from . import _core_py as core
    BACKEND = "python"
else:
    try:
        from . import _core as core
        BACKEND = "cython"
    except ImportError:  # extension not built
        from . import _core_py as core
        BACKEND = "python"

cross_energy = core.cross_energy
self_energy = core.self_energy
c2_grad = core.c2_grad
