"""Backend dispatch for the two numeric hot paths.

``collision_sweep`` and ``mean_shift_modes`` exist twice: a compiled
extension (``palms._speedups``, built at install time when a C toolchain is
present) and a pure-numpy fallback (``palms._pyops``).  The fastest
available implementation is picked once at import; setting the environment
variable ``PALMS_NO_SPEEDUPS=1`` before import forces the fallback.

Both implementations evaluate the same arithmetic on the same operands, so
collision decisions are identical bit for bit and mode positions agree to
float rounding.  ``tests/test_backends.py`` holds them to that.
"""

from __future__ import annotations

import os

from . import _pyops

_BACKENDS = {"python": _pyops}

try:
    from . import _speedups  # type: ignore[attr-defined]

    _BACKENDS["c"] = _speedups
except ImportError:  # no compiled extension in this install
    pass

if os.environ.get("PALMS_NO_SPEEDUPS", "0") not in ("", "0"):
    _ACTIVE = "python"
elif "c" in _BACKENDS:
    _ACTIVE = "c"
else:
    _ACTIVE = "python"


def backend_name() -> str:
    """Name of the implementation in use: ``"c"`` or ``"python"``."""
    return _ACTIVE


def available_backends() -> dict:
    """All importable implementations, keyed by name."""
    return dict(_BACKENDS)


def get_backend(name: str):
    return _BACKENDS[name]


collision_sweep = _BACKENDS[_ACTIVE].collision_sweep
mean_shift_modes = _BACKENDS[_ACTIVE].mean_shift_modes
