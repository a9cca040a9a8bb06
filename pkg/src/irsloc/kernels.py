"""Backend selection for the spectrum-scan hot path.

Prefers the compiled extension; falls back to the numpy implementation when
the extension is missing or IRSLOC_NO_EXT is set. Both expose identical
signatures, so callers never need to know which one they got.
"""

from __future__ import annotations

import os

if os.environ.get("IRSLOC_NO_EXT"):
    from . import _kernels_py as _impl

    BACKEND = "numpy"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build environment
        from . import _kernels_py as _impl

        BACKEND = "numpy"

steering_batch = _impl.steering_batch
music_scan = _impl.music_scan
