"""Hot scan kernels with two interchangeable backends.

The numba backend is used when numba imports cleanly, unless the
environment variable ``DDCSIM_JIT`` is set to ``0``. ``use_backend``
switches at runtime; callers must go through this module's attributes
(``kernels.best_fit(...)``) so a switch takes effect everywhere.
"""
import os
import sys

import numpy as np

from . import _numpy

KERNELS = (
    "rack_argmax",
    "intra_pool_mask",
    "super_rack_mask",
    "next_fit",
    "best_fit",
    "rack_next_fit",
    "rack_best_fit",
    "first_fit_masked",
    "bfs_find",
    "pick_link_first",
    "pick_link_max",
    "group_avail",
    "time_weighted_mean",
)

try:
    from . import _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

BACKENDS = {"numpy": _numpy}
if _numba is not None:
    BACKENDS["numba"] = _numba

backend = None


def use_backend(name):
    """Bind every kernel name in this module to ``name``'s implementation."""
    global backend
    if name not in BACKENDS:
        raise ValueError(f"unknown kernel backend {name!r}; available: {sorted(BACKENDS)}")
    mod = sys.modules[__name__]
    for fn in KERNELS:
        setattr(mod, fn, getattr(BACKENDS[name], fn))
    backend = name


def default_backend():
    if os.environ.get("DDCSIM_JIT", "1").strip().lower() in ("0", "false", "no", "off"):
        return "numpy"
    return "numba" if "numba" in BACKENDS else "numpy"


def warmup():
    """Trigger compilation of every jitted kernel with representative dtypes."""
    if backend != "numba":
        return
    avail = np.array([4, 2, 3, 1, 5, 0], dtype=np.int64)
    kind = np.array([0, 1, 2, 0, 1, 2], dtype=np.int64)
    rack = np.array([0, 0, 0, 1, 1, 1], dtype=np.int64)
    rack_start = np.array([0, 3, 6], dtype=np.int64)
    need = np.array([1, 1, 1], dtype=np.int64)
    rack_max = np.array([[0, 1, 2], [3, 4, 5]], dtype=np.int64)
    bw = np.ones(6)
    cap = np.full(6, 2.0)
    alloc = np.zeros(6)
    _numba.rack_argmax(avail, 0, 3)
    _numba.intra_pool_mask(avail, rack_max, need)
    _numba.super_rack_mask(avail, rack, kind, need, 2)
    _numba.next_fit(avail, 0, 3, 1, 1)
    _numba.best_fit(avail, 0, 3, 1)
    ranges = np.array([[0, 1], [1, 2], [2, 3]], dtype=np.int64)
    _numba.rack_next_fit(avail, ranges, np.full(3, -1, dtype=np.int64), need)
    _numba.rack_best_fit(avail, ranges, need)
    _numba.first_fit_masked(avail, np.array([0, 3], dtype=np.int64), rack,
                            np.ones(2, dtype=np.bool_), 1)
    mask = np.ones((2, 3), dtype=np.bool_)
    want = np.ones(3, dtype=np.bool_)
    for flag in (False, True):
        _numba.bfs_find(avail, rack, kind, rack_start, bw, 0, need, want, mask, flag)
    _numba.pick_link_first(alloc, cap, 0, 3, 1.0)
    _numba.pick_link_max(alloc, cap, 0, 3, 1.0)
    _numba.group_avail(alloc, cap, 0, 3, 2)
    _numba.time_weighted_mean(np.arange(3.0), np.ones((3, 2)), 4.0)


use_backend(default_backend())
