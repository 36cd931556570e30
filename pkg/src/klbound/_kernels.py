"""Hot numeric kernels with a numba path and a pure-numpy fallback.

Two kernels live here:

* ``welford``: streaming central moments (count, mean, M2, M3, M4) of a
  float array.
* ``kl_bound_batch``: the moment-based KL lower bound evaluated
  elementwise over arrays of (E_P, E_Q, V_P, V_Q).

Set ``KLBOUND_DISABLE_NUMBA=1`` to force the numpy implementations. Both
implementations are always importable under explicit names so tests and
the benchmark can compare them.
"""

from __future__ import annotations

import logging
import math
import os

import numpy as np

SERIES_THRESHOLD = 1e-6
_CHUNK = 1 << 16


def _numba_requested() -> bool:
    flag = os.environ.get("KLBOUND_DISABLE_NUMBA", "").strip().lower()
    return flag in ("", "0", "false", "no")


try:
    import numba

    logging.getLogger("numba").setLevel(logging.WARNING)
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def _njit(func):
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)


# ---------------------------------------------------------------------------
# one-pass moments
# ---------------------------------------------------------------------------


def merge_moments(a, b):
    """Combine two (n, mean, M2, M3, M4) tuples of disjoint batches."""
    na, ma, m2a, m3a, m4a = a
    nb, mb, m2b, m3b, m4b = b
    if na == 0:
        return b
    if nb == 0:
        return a
    n = na + nb
    delta = mb - ma
    d_n = delta / n
    mean = ma + d_n * nb
    m2 = m2a + m2b + delta * d_n * na * nb
    m3 = (
        m3a + m3b
        + delta * d_n * d_n * na * nb * (na - nb)
        + 3.0 * d_n * (na * m2b - nb * m2a)
    )
    m4 = (
        m4a + m4b
        + delta * d_n * d_n * d_n * na * nb * (na * na - na * nb + nb * nb)
        + 6.0 * d_n * d_n * (na * na * m2b + nb * nb * m2a)
        + 4.0 * d_n * (na * m3b - nb * m3a)
    )
    return n, mean, m2, m3, m4


_merge_numba = _njit(merge_moments)


def _block_loop(x, block):
    # Each cache-sized block gets exact central sums around its own mean,
    # then joins the running totals. One pass over memory, no per-element
    # division in the dependency chain.
    acc = (0, 0.0, 0.0, 0.0, 0.0)
    size = x.shape[0]
    for start in range(0, size, block):
        stop = min(start + block, size)
        k = stop - start
        s = 0.0
        for i in range(start, stop):
            s += x[i]
        mean = s / k
        r = 0.0
        for i in range(start, stop):
            r += x[i] - mean
        mean += r / k
        m2 = 0.0
        m3 = 0.0
        m4 = 0.0
        for i in range(start, stop):
            d = x[i] - mean
            d2 = d * d
            m2 += d2
            m3 += d2 * d
            m4 += d2 * d2
        acc = _merge_numba(acc, (k, mean, m2, m3, m4))
    return acc


_block_loop_numba = _njit(_block_loop)
_BLOCK = 2048


def welford_numba(x):
    """Streaming (n, mean, M2, M3, M4) with the compiled block kernel."""
    return _block_loop_numba(np.ascontiguousarray(x, dtype=np.float64), _BLOCK)


def welford_numpy(x):
    """Chunked single pass: exact two-pass moments per chunk, merged pairwise."""
    x = np.asarray(x, dtype=np.float64)
    acc = (0, 0.0, 0.0, 0.0, 0.0)
    for start in range(0, x.shape[0], _CHUNK):
        chunk = x[start:start + _CHUNK]
        mean = float(chunk.mean())
        d = chunk - mean
        # residual correction keeps the chunk mean accurate to a few ulps
        mean += float(d.mean())
        d = chunk - mean
        d2 = d * d
        part = (chunk.shape[0], mean, float(d2.sum()), float((d2 * d).sum()), float((d2 * d2).sum()))
        acc = merge_moments(acc, part)
    return acc


# ---------------------------------------------------------------------------
# KL lower bound, elementwise
# ---------------------------------------------------------------------------


def _bound_loop(ep, eq, vp, vq, out):
    for i in range(out.shape[0]):
        gap = eq[i] - ep[i]
        a = gap * gap
        p = vp[i]
        q = vq[i]
        big_a = a + p + q
        d = math.sqrt(a * a + 2.0 * a * (p + q) + (p - q) * (p - q))
        x = d / big_a
        if x < SERIES_THRESHOLD:
            x2 = x * x
            factor = (1.0 + x2 / 3.0 + x2 * x2 / 5.0) / big_a
        else:
            sp = math.sqrt(p)
            sq = math.sqrt(q)
            factor = math.log1p((a + (sp - sq) * (sp - sq) + d) / (2.0 * sp * sq)) / d
        if abs(p - q) <= 0.5 * min(p, q):
            log_term = 0.5 * math.log1p((p - q) / q)
        else:
            log_term = 0.5 * math.log(p / q)
        out[i] = (a + q - p) * factor + log_term
    return out


_bound_loop_numba = _njit(_bound_loop)


def kl_bound_batch_numba(ep, eq, vp, vq):
    ep, eq, vp, vq = np.broadcast_arrays(*(np.asarray(v, dtype=np.float64) for v in (ep, eq, vp, vq)))
    shape = ep.shape
    flat = [np.ascontiguousarray(v).ravel() for v in (ep, eq, vp, vq)]
    out = np.empty(flat[0].shape[0], dtype=np.float64)
    _bound_loop_numba(*flat, out)
    return out.reshape(shape)


def kl_bound_batch_numpy(ep, eq, vp, vq):
    ep, eq, vp, vq = np.broadcast_arrays(*(np.asarray(v, dtype=np.float64) for v in (ep, eq, vp, vq)))
    a = (eq - ep) ** 2
    big_a = a + vp + vq
    d = np.sqrt(a * a + 2.0 * a * (vp + vq) + (vp - vq) ** 2)
    x = d / big_a
    series = x < SERIES_THRESHOLD
    sp, sq = np.sqrt(vp), np.sqrt(vq)
    with np.errstate(divide="ignore", invalid="ignore"):
        closed = np.log1p((a + (sp - sq) ** 2 + d) / (2.0 * sp * sq)) / d
    x2 = x * x
    factor = np.where(series, (1.0 + x2 / 3.0 + x2 * x2 / 5.0) / big_a, closed)
    near = np.abs(vp - vq) <= 0.5 * np.minimum(vp, vq)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_term = np.where(near, 0.5 * np.log1p((vp - vq) / vq), 0.5 * np.log(vp / vq))
    return (a + vq - vp) * factor + log_term


if HAVE_NUMBA and _numba_requested():
    BACKEND = "numba"
    welford = welford_numba
    kl_bound_batch = kl_bound_batch_numba
else:
    BACKEND = "numpy"
    welford = welford_numpy
    kl_bound_batch = kl_bound_batch_numpy
