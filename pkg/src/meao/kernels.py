"""Backend dispatch for the bitstring kernels.

The compiled extension is preferred when importable; setting the
environment variable ``MEAO_PURE_PYTHON=1`` (before import) forces the
pure-Python fallback.  ``BACKEND`` records the active choice.
"""

from __future__ import annotations

import os

if os.environ.get("MEAO_PURE_PYTHON", "").strip() not in ("", "0"):
    from . import _pycore as _impl

    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        from . import _pycore as _impl  # type: ignore[no-redef]

        BACKEND = "python"

pair_annihilation = _impl.pair_annihilation
single_annihilation = _impl.single_annihilation
subset_split = _impl.subset_split
one_body_elements = _impl.one_body_elements

__all__ = [
    "BACKEND",
    "pair_annihilation",
    "single_annihilation",
    "subset_split",
    "one_body_elements",
]
