"""Kernel selection: compiled extension when available, pure Python otherwise.

Set ``BSPLANNER_PURE=1`` to force the pure-Python kernels (used by the
equivalence tests and the kernel benchmark).
"""

import os

if os.environ.get("BSPLANNER_PURE") == "1":
    from . import pure as _impl
else:
    try:
        from . import core as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import pure as _impl

COMPILED = _impl.COMPILED
search = _impl.search
bidi_search = _impl.bidi_search
first_hit = _impl.first_hit
last_exit = _impl.last_exit
