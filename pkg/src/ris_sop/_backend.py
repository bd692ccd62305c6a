"""Selects the simulation kernel backend at import time.

Two interchangeable implementations of the trial kernel exist:

* ``ris_sop._kernels`` — compiled extension (fast path),
* ``ris_sop._kernels_py`` — pure NumPy (always available).

Both honour the same random-stream contract, so a given
``(master_seed, trial_index)`` pair drives the same underlying random
words on either backend.  Floating-point results may differ in the last
couple of bits between backends (different summation order and libm
usage); within one backend results are bit-reproducible.

The environment variable ``RIS_SOP_BACKEND`` forces a choice:
``compiled`` or ``numpy``.  Requesting ``compiled`` when the extension
is missing raises ImportError rather than silently downgrading.
"""

from __future__ import annotations

import os

from . import _kernels_py

_FORCED = os.environ.get("RIS_SOP_BACKEND", "").strip().lower()

if _FORCED == "numpy":
    _impl = _kernels_py
elif _FORCED == "compiled":
    from . import _kernels as _impl  # type: ignore[no-redef]
elif _FORCED == "":
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py
else:
    raise ImportError(
        f"RIS_SOP_BACKEND={_FORCED!r} is not recognised; "
        "use 'compiled' or 'numpy'"
    )

simulate_batch = _impl.simulate_batch


def backend_name() -> str:
    """Name of the active kernel backend: 'compiled' or 'numpy'."""
    return _impl.BACKEND_NAME
