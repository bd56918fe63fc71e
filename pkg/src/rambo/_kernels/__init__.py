"""Kernel backend selection.

RAMBO_KERNELS=numba forces the jitted backend, RAMBO_KERNELS=numpy forces
the pure-numpy reference. Unset, the jitted backend is used when numba
imports cleanly. Both backends are bit-identical; the flag only trades
compile latency for throughput.
"""

import os

_choice = os.environ.get("RAMBO_KERNELS", "").strip().lower()

if _choice == "numpy":
    from . import reference as _impl

    BACKEND = "numpy"
elif _choice == "numba":
    from . import accel as _impl

    BACKEND = "numba"
elif _choice:
    raise ImportError(f"RAMBO_KERNELS must be 'numba' or 'numpy', got {_choice!r}")
else:
    try:
        from . import accel as _impl

        BACKEND = "numba"
    except ImportError:
        from . import reference as _impl

        BACKEND = "numpy"

cw_mod_many = _impl.cw_mod_many
cw_hash_many = _impl.cw_hash_many
fnv1a_window_digests = _impl.fnv1a_window_digests
fnv1a_packed_digests = _impl.fnv1a_packed_digests
bloom_set_many = _impl.bloom_set_many
bloom_test_many = _impl.bloom_test_many
grid_test_one = _impl.grid_test_one
grid_test_many = _impl.grid_test_many
