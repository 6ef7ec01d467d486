"""Numeric kernel backends.

Two implementations of the hot kernels are provided: numba-jitted loops and a
pure-numpy path. Selection is controlled by the ``PEPSLAB_BACKEND`` environment
variable (``auto``, ``numba`` or ``numpy``; default ``auto`` picks numba when it
is importable). ``PEPSLAB_THREADS`` caps numba's thread pool; the kernels here
are single-threaded on purpose so that reduction order, and therefore output,
is deterministic.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

_threads = os.environ.get("PEPSLAB_THREADS")
if HAS_NUMBA and _threads:
    try:
        numba.set_num_threads(max(1, min(int(_threads), numba.config.NUMBA_NUM_THREADS)))
    except ValueError:
        pass


def _resolve(name: str) -> str:
    name = name.lower()
    if name not in ("auto", "numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}: expected auto, numba or numpy")
    if name == "numba" and not HAS_NUMBA:
        raise ValueError("numba backend requested but numba is not importable")
    if name == "auto":
        return "numba" if HAS_NUMBA else "numpy"
    return name


_BACKEND = _resolve(os.environ.get("PEPSLAB_BACKEND", "auto"))


def backend_name() -> str:
    """Name of the active kernel backend, ``numba`` or ``numpy``."""
    return _BACKEND


def set_backend(name: str) -> str:
    """Override the active backend programmatically (used by tests and benchmarks)."""
    global _BACKEND
    _BACKEND = _resolve(name)
    return _BACKEND


if HAS_NUMBA:

    @njit(cache=True)
    def _gemm_numba(a, b):
        m, k = a.shape
        n = b.shape[1]
        out = np.zeros((m, n), dtype=np.complex128)
        for i in range(m):
            for p in range(k):
                aip = a[i, p]
                if aip == 0j:
                    continue
                for j in range(n):
                    out[i, j] += aip * b[p, j]
        return out

    @njit(cache=True)
    def _count_tilings_numba(left, top, right, bottom, rows, cols, periodic):
        t = left.shape[0]
        n = rows * cols
        assign = np.zeros(n, dtype=np.int64)
        count = 0
        while True:
            ok = True
            for idx in range(n):
                r = idx // cols
                c = idx % cols
                a = assign[idx]
                if c + 1 < cols or periodic:
                    nb = assign[r * cols + (c + 1) % cols]
                    if right[a] != left[nb]:
                        ok = False
                        break
                if r + 1 < rows or periodic:
                    nb = assign[((r + 1) % rows) * cols + c]
                    if bottom[a] != top[nb]:
                        ok = False
                        break
            if ok:
                count += 1
            pos = 0
            while pos < n:
                assign[pos] += 1
                if assign[pos] < t:
                    break
                assign[pos] = 0
                pos += 1
            if pos == n:
                return count


def _gemm_numpy(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.matmul(a, b)


def _count_tilings_numpy(left, top, right, bottom, rows, cols, periodic) -> int:
    # Vectorized enumeration: one row per assignment, one column per site.
    t = left.shape[0]
    n = rows * cols
    grids = np.indices((t,) * n).reshape(n, -1).T  # (t**n, n)
    ok = np.ones(grids.shape[0], dtype=bool)
    for idx in range(n):
        r, c = divmod(idx, cols)
        a = grids[:, idx]
        if c + 1 < cols or periodic:
            nb = grids[:, r * cols + (c + 1) % cols]
            ok &= right[a] == left[nb]
        if r + 1 < rows or periodic:
            nb = grids[:, ((r + 1) % rows) * cols + c]
            ok &= bottom[a] == top[nb]
    return int(ok.sum())


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Complex matrix product through the active backend.

    Inputs are promoted to C-contiguous complex128 2-D arrays. This is the
    single multiply primitive behind every tensor contraction in the package.
    """
    a = np.ascontiguousarray(a, dtype=np.complex128)
    b = np.ascontiguousarray(b, dtype=np.complex128)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    if _BACKEND == "numba":
        return _gemm_numba(a, b)
    return _gemm_numpy(a, b)


def count_tilings(left, top, right, bottom, rows: int, cols: int, periodic: bool = True) -> int:
    """Count color-matched tile assignments of a rows x cols grid by enumeration.

    ``left/top/right/bottom`` are integer color arrays indexed by tile id. The
    assignment space has t**(rows*cols) points; callers keep that at desk scale.
    """
    left = np.ascontiguousarray(left, dtype=np.int64)
    top = np.ascontiguousarray(top, dtype=np.int64)
    right = np.ascontiguousarray(right, dtype=np.int64)
    bottom = np.ascontiguousarray(bottom, dtype=np.int64)
    t = left.shape[0]
    n = rows * cols
    if t == 0:
        return 0
    if t ** n > 1 << 26:
        raise ValueError(f"enumeration space {t}**{n} too large")
    if _BACKEND == "numba":
        return int(_count_tilings_numba(left, top, right, bottom, rows, cols, periodic))
    return _count_tilings_numpy(left, top, right, bottom, rows, cols, periodic)
