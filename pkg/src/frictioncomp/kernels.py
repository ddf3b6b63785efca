"""Backend selection for the stepping kernel.

The compiled extension is used when it imports; setting the environment
variable ``FRICTIONCOMP_PURE_PYTHON=1`` forces the pure-Python fallback.
"""

import os

if os.environ.get("FRICTIONCOMP_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        from . import _kernels_py as _impl

from . import _kernels_py as python_backend  # noqa: E402

BACKEND = _impl.BACKEND
NY = _impl.NY
advance = _impl.advance
step = _impl.step
rhs = _impl.rhs
forces = _impl.forces
crossed = _impl.crossed
branch = _impl.branch

from ._kernels_py import (  # noqa: E402
    MODE_FIXED,
    MODE_PRESLIDING,
    MODE_STUCK,
    NPAR,
    P_ATOL,
    P_C,
    P_CF,
    P_FR,
    P_GAMMA,
    P_HMAX,
    P_HMIN,
    P_K,
    P_LAG,
    P_MODE,
    P_RADIUS,
    P_RELAY,
    P_REST,
    P_RTOL,
    P_S,
    P_VEL,
    P_WX1,
    P_XEQ,
    STATUS_DONE,
    STATUS_FULL,
    STATUS_GUARD,
    STATUS_NONFINITE,
    STATUS_UNDERFLOW,
)

__all__ = [
    "BACKEND", "NY", "advance", "step", "rhs", "forces", "crossed", "branch",
    "python_backend", "compiled_backend", "MODE_FIXED", "MODE_PRESLIDING",
    "MODE_STUCK", "NPAR", "P_ATOL", "P_C", "P_CF", "P_FR", "P_GAMMA", "P_HMAX",
    "P_HMIN", "P_K", "P_LAG", "P_MODE", "P_RADIUS", "P_RELAY", "P_REST", "P_RTOL",
    "P_S", "P_VEL", "P_WX1", "P_XEQ", "STATUS_DONE", "STATUS_FULL", "STATUS_GUARD",
    "STATUS_NONFINITE", "STATUS_UNDERFLOW",
]


def compiled_backend():
    """Return the compiled module, or ``None`` when it is not built."""
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels
