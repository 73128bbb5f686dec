"""Backend selection for the hot numerical kernels.

The compiled extension is used when it imports; otherwise the pure-Python
module is loaded. Setting ``CVTELEFID_BACKEND=python`` forces the fallback.
"""

from __future__ import annotations

import os

from . import _pykernels

_requested = os.environ.get("CVTELEFID_BACKEND", "auto").lower()

if _requested == "python":
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        _impl = _pykernels
        BACKEND = "python"

eta_form = _impl.eta_form
det_residual = _impl.det_residual
stationarity_residual = _impl.stationarity_residual
candidate_fidelity = _impl.candidate_fidelity
lambda_roots = _impl.lambda_roots
interior_candidates = _impl.interior_candidates
oracle_fidelity = _impl.oracle_fidelity
oracle_search = _impl.oracle_search

N_ETA_GRID = _pykernels.N_ETA_GRID
N_LAMBDA_GRID = _pykernels.N_LAMBDA_GRID


def backends():
    """Available kernel modules keyed by name (for benchmarks and cross-checks)."""
    out = {"python": _pykernels}
    try:
        from . import _kernels

        out["compiled"] = _kernels
    except ImportError:
        pass
    return out
