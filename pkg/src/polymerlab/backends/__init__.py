"""Kernel backend selection.

The compiled Cython kernel is used when importable; otherwise the pure-Python
reference kernel takes over with identical (bit-for-bit) semantics.  Set
``POLYMER_BACKEND=pure`` or ``POLYMER_BACKEND=compiled`` to force a choice;
forcing ``compiled`` raises if the extension is missing.
"""

import os

from . import pure

_choice = os.environ.get("POLYMER_BACKEND", "").strip().lower()

if _choice == "pure":
    _impl = pure
    backend_name = "pure"
elif _choice == "compiled":
    from . import _speedups as _impl  # noqa: F401  (ImportError is the signal)

    backend_name = "compiled"
elif _choice == "":
    try:
        from . import _speedups as _impl

        backend_name = "compiled"
    except ImportError:
        _impl = pure
        backend_name = "pure"
else:
    raise RuntimeError(f"POLYMER_BACKEND must be 'pure' or 'compiled', got {_choice!r}")

mix64 = _impl.mix64
derive_key = _impl.derive_key
uniform_at = _impl.uniform_at
log_gamma_variate = _impl.log_gamma_variate
point_log_weight = _impl.point_log_weight
weights_row = _impl.weights_row
logaddexp = _impl.logaddexp
dp_row = _impl.dp_row
route_interval = _impl.route_interval
fold_logaddexp = _impl.fold_logaddexp
