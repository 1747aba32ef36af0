"""Backend selection for the matching kernels.

The compiled extension is used when it imports cleanly; otherwise the
pure-Python twin takes over. Set ``LSCM_DESIGN_PURE=1`` to force the
fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("LSCM_DESIGN_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

enumerate_matchings = _impl.enumerate_matchings
count_marginals = _impl.count_marginals
greedy_sample_batch = _impl.greedy_sample_batch


def backends():
    """Return ``{name: module}`` for every kernel backend available here."""
    found = {"python": _kernels_py}
    try:
        from . import _kernels as compiled
    except ImportError:
        return found
    found["cython"] = compiled
    return found
