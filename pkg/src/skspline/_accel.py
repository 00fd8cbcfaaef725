"""Hot summation kernels, numba-compiled with a pure-numpy fallback.

Two reductions carry nearly all of the runtime:

``gauss_shift_sum``
    out[p] = sum_s w[s] * exp(-|M (x[p] + t[s])|^2)

``phase_sum``
    out[p] = sum_s (wr[s] + i wi[s]) * exp(i <v[s], x[p]>)

Both are compensated along the shift axis and visit shifts in the order
given, so results do not depend on thread scheduling or chunking.

The backend is picked once at import time. Set ``SKSPLINE_DISABLE_NUMBA=1``
to force the numpy path (also used automatically when numba is missing).
"""
from __future__ import annotations

import os

import numpy as np

# exp(-690.78) ~ 1e-300; anything smaller is flushed to zero
FLUSH_EXPONENT = 690.7755278982137

_BLOCK_ELEMS = 1 << 20


def _env_disabled() -> bool:
    return os.environ.get("SKSPLINE_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None
    HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# numpy path


def _pairwise_compensated(t: np.ndarray) -> np.ndarray:
    """Row sums of ``t`` (P, S) via pairwise TwoSum with error accumulation."""
    p = t.shape[0]
    err = np.zeros(p)
    while t.shape[1] > 1:
        if t.shape[1] % 2:
            t = np.concatenate([t, np.zeros((p, 1))], axis=1)
        a = t[:, 0::2]
        b = t[:, 1::2]
        s = a + b
        bv = s - a
        err += ((a - (s - bv)) + (b - bv)).sum(axis=1)
        t = s
    if t.shape[1] == 0:
        return err
    return t[:, 0] + err


def _neumaier_add(acc: np.ndarray, comp: np.ndarray, term: np.ndarray) -> None:
    s = acc + term
    big = np.abs(acc) >= np.abs(term)
    comp += np.where(big, (acc - s) + term, (term - s) + acc)
    acc[...] = s


def gauss_shift_sum_numpy(x, shifts, weights, metric):
    x = np.ascontiguousarray(x, dtype=np.float64)
    shifts = np.ascontiguousarray(shifts, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    metric = np.ascontiguousarray(metric, dtype=np.float64)
    npts, n = x.shape
    acc = np.zeros(npts)
    comp = np.zeros(npts)
    block = max(1, _BLOCK_ELEMS // max(1, npts * n))
    for lo in range(0, shifts.shape[0], block):
        t = shifts[lo:lo + block]
        y = (x[:, None, :] + t[None, :, :]) @ metric.T
        q = np.einsum("psk,psk->ps", y, y)
        vals = np.where(q > FLUSH_EXPONENT, 0.0, np.exp(-np.minimum(q, FLUSH_EXPONENT)))
        _neumaier_add(acc, comp, _pairwise_compensated(vals * weights[lo:lo + block]))
    return acc + comp


def phase_sum_numpy(x, vecs, wr, wi):
    x = np.ascontiguousarray(x, dtype=np.float64)
    vecs = np.ascontiguousarray(vecs, dtype=np.float64)
    wr = np.ascontiguousarray(wr, dtype=np.float64)
    wi = np.ascontiguousarray(wi, dtype=np.float64)
    npts = x.shape[0]
    acc_r, comp_r = np.zeros(npts), np.zeros(npts)
    acc_i, comp_i = np.zeros(npts), np.zeros(npts)
    block = max(1, _BLOCK_ELEMS // max(1, npts))
    for lo in range(0, vecs.shape[0], block):
        ph = x @ vecs[lo:lo + block].T
        c, s = np.cos(ph), np.sin(ph)
        a, b = wr[lo:lo + block], wi[lo:lo + block]
        _neumaier_add(acc_r, comp_r, _pairwise_compensated(a * c - b * s))
        _neumaier_add(acc_i, comp_i, _pairwise_compensated(a * s + b * c))
    return acc_r + comp_r, acc_i + comp_i


# ---------------------------------------------------------------------------
# numba path

if HAVE_NUMBA:

    @numba.njit(cache=True, fastmath=False)
    def gauss_shift_sum_numba(x, shifts, weights, metric):
        npts, n = x.shape
        nshift = shifts.shape[0]
        out = np.empty(npts)
        y = np.empty(n)
        for p in range(npts):
            acc = 0.0
            comp = 0.0
            for s in range(nshift):
                for i in range(n):
                    y[i] = x[p, i] + shifts[s, i]
                q = 0.0
                for i in range(n):
                    r = 0.0
                    for j in range(n):
                        r += metric[i, j] * y[j]
                    q += r * r
                if q > FLUSH_EXPONENT:
                    continue
                term = weights[s] * np.exp(-q)
                t = acc + term
                if abs(acc) >= abs(term):
                    comp += (acc - t) + term
                else:
                    comp += (term - t) + acc
                acc = t
            out[p] = acc + comp
        return out

    @numba.njit(cache=True, fastmath=False)
    def phase_sum_numba(x, vecs, wr, wi):
        npts, n = x.shape
        nvec = vecs.shape[0]
        out_r = np.empty(npts)
        out_i = np.empty(npts)
        for p in range(npts):
            ar = 0.0
            cr = 0.0
            ai = 0.0
            ci = 0.0
            for s in range(nvec):
                ph = 0.0
                for i in range(n):
                    ph += x[p, i] * vecs[s, i]
                c = np.cos(ph)
                sn = np.sin(ph)
                tr = wr[s] * c - wi[s] * sn
                ti = wr[s] * sn + wi[s] * c
                t = ar + tr
                if abs(ar) >= abs(tr):
                    cr += (ar - t) + tr
                else:
                    cr += (tr - t) + ar
                ar = t
                t = ai + ti
                if abs(ai) >= abs(ti):
                    ci += (ai - t) + ti
                else:
                    ci += (ti - t) + ai
                ai = t
            out_r[p] = ar + cr
            out_i[p] = ai + ci
        return out_r, out_i

else:  # pragma: no cover
    gauss_shift_sum_numba = None
    phase_sum_numba = None


USE_NUMBA = HAVE_NUMBA and not _env_disabled()
BACKEND = "numba" if USE_NUMBA else "numpy"


def _as2d(a):
    return np.ascontiguousarray(np.atleast_2d(np.asarray(a, dtype=np.float64)))


def gauss_shift_sum(x, shifts, weights, metric) -> np.ndarray:
    """Compensated ``sum_s w[s] exp(-|metric @ (x[p] + shifts[s])|^2)`` for each row of ``x``."""
    x = _as2d(x)
    shifts = _as2d(shifts)
    weights = np.ascontiguousarray(weights, dtype=np.float64).reshape(-1)
    metric = _as2d(metric)
    if shifts.shape[0] != weights.shape[0]:
        raise ValueError("shifts and weights disagree in length")
    if USE_NUMBA:
        return gauss_shift_sum_numba(x, shifts, weights, metric)
    return gauss_shift_sum_numpy(x, shifts, weights, metric)


def phase_sum(x, vecs, wr, wi=None) -> np.ndarray:
    """Compensated complex ``sum_s w[s] exp(i <vecs[s], x[p]>)`` for each row of ``x``."""
    x = _as2d(x)
    vecs = _as2d(vecs)
    wr = np.ascontiguousarray(wr, dtype=np.float64).reshape(-1)
    wi = np.zeros_like(wr) if wi is None else np.ascontiguousarray(wi, dtype=np.float64).reshape(-1)
    if USE_NUMBA:
        re, im = phase_sum_numba(x, vecs, wr, wi)
    else:
        re, im = phase_sum_numpy(x, vecs, wr, wi)
    return re + 1j * im
