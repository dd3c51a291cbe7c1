"""Batched 3x3 matrix exponential in double-double arithmetic.

Scaling and squaring with a Taylor core, carried out with error-free
transformations so the result is correct to roughly 1e-30 before the final
rounding to double. Used as a test-time oracle where the double-precision
Pade routine loses a few digits to repeated squaring of large rotations.
"""

from __future__ import annotations

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def _norm(hi, lo):
    s = hi + lo
    return s, lo - (s - hi)


def _dd_add(x, y):
    s, e = _two_sum(x[0], y[0])
    e = e + (x[1] + y[1])
    return _norm(s, e)


def _dd_mul(x, y):
    p, e = _two_prod(x[0], y[0])
    e = e + (x[0] * y[1] + x[1] * y[0])
    return _norm(p, e)


def _dd_div_int(x, j: int):
    q1 = x[0] / j
    p, e = _two_prod(q1, np.full_like(q1, float(j)))
    r = ((x[0] - p) - e) + x[1]
    return _norm(q1, r / j)


def _dd_matmul(a, b):
    """a, b: tuples (hi, lo) of arrays shaped (N, 3, 3)."""
    n = a[0].shape[0]
    hi = np.zeros((n, 3, 3))
    lo = np.zeros((n, 3, 3))
    for i in range(3):
        for j in range(3):
            acc = (np.zeros(n), np.zeros(n))
            for k in range(3):
                acc = _dd_add(acc, _dd_mul((a[0][:, i, k], a[1][:, i, k]),
                                           (b[0][:, k, j], b[1][:, k, j])))
            hi[:, i, j], lo[:, i, j] = acc
    return hi, lo


def expm_double_double(mats: np.ndarray, taylor_degree: int = 30) -> np.ndarray:
    """exp of each matrix in a (N, 3, 3) stack, returned in double precision."""
    mats = np.asarray(mats, dtype=float)
    single = mats.ndim == 2
    if single:
        mats = mats[None]
    norms = np.max(np.sum(np.abs(mats), axis=1), axis=1)
    squarings = np.maximum(0, np.ceil(np.log2(np.maximum(norms, 1e-300))) + 1).astype(int)
    scaled = mats / (2.0 ** squarings)[:, None, None]  # exact: power-of-two scaling
    x = (scaled, np.zeros_like(scaled))
    eye = np.broadcast_to(np.eye(3), mats.shape).copy()
    term = (eye.copy(), np.zeros_like(eye))
    total = (eye.copy(), np.zeros_like(eye))
    for j in range(1, taylor_degree + 1):
        term = _dd_matmul(term, x)
        term = _dd_div_int(term, j)
        total = _dd_add(total, term)
    for step in range(int(squarings.max(initial=0))):
        active = squarings > step
        sq = _dd_matmul(total, total)
        total = (np.where(active[:, None, None], sq[0], total[0]),
                 np.where(active[:, None, None], sq[1], total[1]))
    out = total[0] + total[1]
    return out[0] if single else out
