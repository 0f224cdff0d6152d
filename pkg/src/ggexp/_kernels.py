"""Hot numeric kernels: batched minimum-distance decoding.

Two interchangeable backends compute the same quantity:

* ``numba``  -- @njit loops, the default when numba imports cleanly;
* ``numpy``  -- chunked broadcasting, always available.

Selection: set ``GGEXP_BACKEND=numpy`` (or ``numba``) to force one; anything
else (or unset) auto-selects.  ``benchmarks/bench_kernels.py`` compares the
two.  Neither backend uses fastmath or threading, so decode decisions are
deterministic for fixed inputs within a backend.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["decode_batch", "backend_name", "available_backends"]

_ENV_FLAG = "GGEXP_BACKEND"


def _decode_batch_numpy(y: np.ndarray, codewords: np.ndarray, q: float) -> np.ndarray:
    """Index of the q-norm-nearest codeword per row of y; ties and duplicate
    codewords resolve to the lowest index (argmin semantics)."""
    y = np.ascontiguousarray(y, dtype=np.float64)
    codewords = np.ascontiguousarray(codewords, dtype=np.float64)
    out = np.empty(y.shape[0], dtype=np.int64)
    # Chunk to keep the (chunk, M, n) intermediate within ~64 MB.
    chunk = max(1, int(8_000_000 // max(1, codewords.size)))
    for start in range(0, y.shape[0], chunk):
        block = y[start : start + chunk]
        diff = np.abs(block[:, None, :] - codewords[None, :, :])
        if q == 2.0:
            dist = np.einsum("bmn,bmn->bm", diff, diff)
        elif q == 1.0:
            dist = diff.sum(axis=2)
        else:
            dist = (diff**q).sum(axis=2)
        out[start : start + block.shape[0]] = np.argmin(dist, axis=1)
    return out


def _make_numba_kernel():
    from numba import njit

    @njit(cache=True)
    def kernel(y, codewords, q):  # pragma: no cover - exercised via wrapper
        batch, n = y.shape
        m = codewords.shape[0]
        out = np.empty(batch, dtype=np.int64)
        for b in range(batch):
            best = -1
            best_dist = np.inf
            for j in range(m):
                dist = 0.0
                if q == 2.0:
                    for k in range(n):
                        d = y[b, k] - codewords[j, k]
                        dist += d * d
                elif q == 1.0:
                    for k in range(n):
                        dist += abs(y[b, k] - codewords[j, k])
                else:
                    for k in range(n):
                        dist += abs(y[b, k] - codewords[j, k]) ** q
                if dist < best_dist:
                    best_dist = dist
                    best = j
            out[b] = best
        return out

    def decode(y, codewords, q):
        return kernel(
            np.ascontiguousarray(y, dtype=np.float64),
            np.ascontiguousarray(codewords, dtype=np.float64),
            float(q),
        )

    return decode


def available_backends() -> dict:
    backends = {"numpy": _decode_batch_numpy}
    try:
        backends["numba"] = _make_numba_kernel()
    except ImportError:  # pragma: no cover - numba is an install-time dep
        pass
    return backends


def _select():
    backends = available_backends()
    want = os.environ.get(_ENV_FLAG, "auto").lower()
    if want in backends:
        return want, backends[want]
    if "numba" in backends:
        return "numba", backends["numba"]
    return "numpy", backends["numpy"]


_NAME, _DECODE = _select()


def backend_name() -> str:
    return _NAME


def decode_batch(y: np.ndarray, codewords: np.ndarray, q: float) -> np.ndarray:
    """Decode each row of ``y`` to the lowest-index nearest codeword."""
    return _DECODE(y, codewords, q)
