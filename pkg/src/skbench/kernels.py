"""Selects the compiled stepping kernel, with a NumPy fallback.

Set SKBENCH_PURE_PYTHON=1 to force the fallback (used by the parity tests
and the kernel benchmark). Both backends implement the same contract and
produce bit-identical results.
"""

from __future__ import annotations

import os

if os.environ.get("SKBENCH_PURE_PYTHON"):
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "python"

mh_steps = _impl.mh_steps
