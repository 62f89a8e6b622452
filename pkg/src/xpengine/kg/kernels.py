"""Kernel backend selection: compiled extension when present, pure otherwise.

Set ``XPENGINE_PURE=1`` to force the fallback (used by tests and benchmarks).
"""

from __future__ import annotations

import os

from . import _sgd_py

if os.environ.get("XPENGINE_PURE") == "1":
    _backend = _sgd_py
    BACKEND = "pure"
else:
    try:
        from . import _sgd_cy as _backend  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _backend = _sgd_py
        BACKEND = "pure"

train_sgd = _backend.train_sgd


def backends() -> dict[str, object]:
    """All importable kernel backends, keyed by name."""
    available: dict[str, object] = {"pure": _sgd_py.train_sgd}
    try:
        from . import _sgd_cy

        available["compiled"] = _sgd_cy.train_sgd
    except ImportError:
        pass
    return available
