"""Hot numeric kernels with two interchangeable backends.

``numba``  -- @njit compiled loops (default when numba imports).
``numpy``  -- vectorised pure-numpy path, no compilation.

The backend is read from ``FTHRESH_BACKEND`` at import time and can be
switched at runtime with :func:`set_backend` / :func:`use_backend`.  Both
paths must return identical arrays; the test suite and
``benchmarks/bench_kernels.py`` check that.

Term arrays: ``exps`` is an ``(k, n)`` int64 matrix of exponent vectors,
``coefs`` a length-``k`` int64 vector of residues in ``[1, p)``.
"""

from __future__ import annotations

import contextlib
import os

import numpy as np

from .errors import BudgetExceeded

try:  # pragma: no cover - exercised implicitly
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

# Accumulator arrays larger than this switch to the sort-based path.
DENSE_LIMIT = 1 << 22
# Pair products materialised per chunk on the sort-based path.
CHUNK_PAIRS = 1 << 22
# Largest encodable key space; beyond this the products are done in Python.
KEY_LIMIT = 1 << 62


def _initial_backend() -> str:
    requested = os.environ.get("FTHRESH_BACKEND", "").strip().lower()
    if os.environ.get("FTHRESH_DISABLE_NUMBA", "").strip() not in ("", "0"):
        requested = "numpy"
    if requested == "numpy":
        return "numpy"
    if requested not in ("", "numba"):
        raise ValueError(f"FTHRESH_BACKEND must be 'numba' or 'numpy', got {requested!r}")
    return "numba" if HAVE_NUMBA else "numpy"


_BACKEND = _initial_backend()


def get_backend() -> str:
    return _BACKEND


def set_backend(name: str) -> None:
    global _BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _BACKEND = name


@contextlib.contextmanager
def use_backend(name: str):
    previous = _BACKEND
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


# ---------------------------------------------------------------------------
# key encoding


def _strides(radix):
    strides = np.ones(len(radix), dtype=np.int64)
    acc = 1
    for i, r in enumerate(radix):
        strides[i] = acc
        acc *= int(r)
    return strides, acc


def _decode(keys: np.ndarray, radix, strides) -> np.ndarray:
    n = len(radix)
    out = np.empty((keys.shape[0], n), dtype=np.int64)
    for v in range(n):
        out[:, v] = (keys // strides[v]) % radix[v]
    return out


# ---------------------------------------------------------------------------
# pure-numpy backend


def _np_reduce(keys: np.ndarray, vals: np.ndarray, p: int):
    if keys.size == 0:
        return keys, vals
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    vals = vals[order]
    starts = np.flatnonzero(np.r_[True, keys[1:] != keys[:-1]])
    sums = np.add.reduceat(vals % p, starts) % p
    uk = keys[starts]
    keep = sums != 0
    return uk[keep], sums[keep]


def _np_mul(ka, ca, ea, kb, cb, eb, cap, p):
    rows = max(1, CHUNK_PAIRS // max(1, kb.shape[0]))
    parts_k, parts_v = [], []
    for i0 in range(0, ka.shape[0], rows):
        sl = slice(i0, i0 + rows)
        keys = ka[sl, None] + kb[None, :]
        vals = (ca[sl, None] * cb[None, :]) % p
        if cap > 0:
            ok = np.all(ea[sl, None, :] + eb[None, :, :] < cap, axis=2)
            keys = keys[ok]
            vals = vals[ok]
        else:
            keys = keys.ravel()
            vals = vals.ravel()
        k, v = _np_reduce(keys, vals, p)
        parts_k.append(k)
        parts_v.append(v)
    if len(parts_k) == 1:
        return parts_k[0], parts_v[0]
    return _np_reduce(np.concatenate(parts_k), np.concatenate(parts_v), p)


# ---------------------------------------------------------------------------
# numba backend

if HAVE_NUMBA:

    @njit(cache=True)
    def _nb_mul_dense(ka, ca, ea, kb, cb, eb, cap, p, size):
        acc = np.zeros(size, dtype=np.int64)
        nv = ea.shape[1]
        for i in range(ka.shape[0]):
            for j in range(kb.shape[0]):
                if cap > 0:
                    ok = True
                    for v in range(nv):
                        if ea[i, v] + eb[j, v] >= cap:
                            ok = False
                            break
                    if not ok:
                        continue
                k = ka[i] + kb[j]
                acc[k] = (acc[k] + ca[i] * cb[j]) % p
        nz = 0
        for k in range(size):
            if acc[k] != 0:
                nz += 1
        keys = np.empty(nz, dtype=np.int64)
        vals = np.empty(nz, dtype=np.int64)
        t = 0
        for k in range(size):
            if acc[k] != 0:
                keys[t] = k
                vals[t] = acc[k]
                t += 1
        return keys, vals

    @njit(cache=True)
    def _nb_reduce(keys, vals, p):
        if keys.shape[0] == 0:
            return keys, vals
        order = np.argsort(keys, kind="mergesort")
        out_k = np.empty(keys.shape[0], dtype=np.int64)
        out_v = np.empty(keys.shape[0], dtype=np.int64)
        t = -1
        last = -1
        for idx in range(order.shape[0]):
            k = keys[order[idx]]
            v = vals[order[idx]] % p
            if t >= 0 and k == last:
                out_v[t] = (out_v[t] + v) % p
            else:
                t += 1
                out_k[t] = k
                out_v[t] = v
                last = k
        m = 0
        for i in range(t + 1):
            if out_v[i] != 0:
                out_k[m] = out_k[i]
                out_v[m] = out_v[i]
                m += 1
        return out_k[:m].copy(), out_v[:m].copy()

    @njit(cache=True)
    def _nb_mul_sparse(ka, ca, ea, kb, cb, eb, cap, p):
        nv = ea.shape[1]
        n = ka.shape[0] * kb.shape[0]
        keys = np.empty(n, dtype=np.int64)
        vals = np.empty(n, dtype=np.int64)
        t = 0
        for i in range(ka.shape[0]):
            for j in range(kb.shape[0]):
                if cap > 0:
                    ok = True
                    for v in range(nv):
                        if ea[i, v] + eb[j, v] >= cap:
                            ok = False
                            break
                    if not ok:
                        continue
                keys[t] = ka[i] + kb[j]
                vals[t] = (ca[i] * cb[j]) % p
                t += 1
        return _nb_reduce(keys[:t], vals[:t], p)

    @njit(cache=True)
    def _nb_orbit(num, den, q, lim, budget):
        # Brent cycle detection on x -> q*x, then subtract 1 while x > lim.
        out = np.zeros((num.shape[0], 3), dtype=np.int64)
        bound = lim * den
        for idx in range(num.shape[0]):
            d = den[idx]
            top = bound[idx]
            x0 = num[idx]
            power = 1
            lam = 1
            tort = x0
            hare = q * x0
            if hare > top:
                hare -= ((hare - top + d - 1) // d) * d
            steps = 1
            while tort != hare:
                if steps > budget:
                    break
                if power == lam:
                    tort = hare
                    power *= 2
                    lam = 0
                hare = q * hare
                if hare > top:
                    hare -= ((hare - top + d - 1) // d) * d
                lam += 1
                steps += 1
            if tort != hare:
                out[idx, 0] = -1
                continue
            tort = x0
            hare = x0
            for _ in range(lam):
                hare = q * hare
                if hare > top:
                    hare -= ((hare - top + d - 1) // d) * d
            mu = 0
            while tort != hare:
                tort = q * tort
                if tort > top:
                    tort -= ((tort - top + d - 1) // d) * d
                hare = q * hare
                if hare > top:
                    hare -= ((hare - top + d - 1) // d) * d
                mu += 1
            out[idx, 0] = mu
            out[idx, 1] = lam
            out[idx, 2] = tort
        return out


# ---------------------------------------------------------------------------
# public kernels


def mul_terms(ea, ca, eb, cb, p: int, cap: int | None = None):
    """Product of two term arrays over F_p.

    With ``cap`` set, every monomial having an exponent ``>= cap`` is
    dropped, i.e. the product is taken in ``A/(x_1^cap, ..., x_n^cap)``.
    Returns ``(exps, coefs)`` sorted by encoded key.
    """
    nv = ea.shape[1]
    if cap is not None:
        ka_keep = np.all(ea < cap, axis=1)
        kb_keep = np.all(eb < cap, axis=1)
        ea, ca = ea[ka_keep], ca[ka_keep]
        eb, cb = eb[kb_keep], cb[kb_keep]
        radix = [int(cap)] * nv
    else:
        if ea.shape[0] == 0 or eb.shape[0] == 0:
            radix = [1] * nv
        else:
            radix = [int(ea[:, v].max() + eb[:, v].max() + 1) for v in range(nv)]
    empty = (np.zeros((0, nv), dtype=np.int64), np.zeros(0, dtype=np.int64))
    if ea.shape[0] == 0 or eb.shape[0] == 0:
        return empty
    strides, size = _strides(radix)
    if size >= KEY_LIMIT:
        raise BudgetExceeded(f"monomial key space {size} exceeds the 62-bit encoding")
    ka = ea @ strides
    kb = eb @ strides
    ca = ca.astype(np.int64) % p
    cb = cb.astype(np.int64) % p
    capv = int(cap) if cap is not None else 0
    if _BACKEND == "numba":
        if size <= DENSE_LIMIT and size <= 8 * ka.shape[0] * kb.shape[0] + 1024:
            keys, vals = _nb_mul_dense(ka, ca, ea, kb, cb, eb, capv, p, size)
        else:
            rows = max(1, CHUNK_PAIRS // kb.shape[0])
            if rows >= ka.shape[0]:
                keys, vals = _nb_mul_sparse(ka, ca, ea, kb, cb, eb, capv, p)
            else:
                pk, pv = [], []
                for i0 in range(0, ka.shape[0], rows):
                    sl = slice(i0, i0 + rows)
                    k, v = _nb_mul_sparse(ka[sl], ca[sl], ea[sl], kb, cb, eb, capv, p)
                    pk.append(k)
                    pv.append(v)
                keys, vals = _nb_reduce(np.concatenate(pk), np.concatenate(pv), p)
    else:
        keys, vals = _np_mul(ka, ca, ea, kb, cb, eb, capv, p)
    return _decode(keys, radix, strides), vals


def root_terms(exps, coefs, q: int):
    """Split terms by exponent residue mod ``q``.

    Returns ``(residue_ids, quotient_exps, coefs)`` with ``residue_ids``
    grouping terms that share ``exps % q``; the Frobenius root of the
    polynomial is generated by one polynomial per group.
    """
    quot = exps // q
    rem = exps % q
    if exps.shape[0] == 0:
        return np.zeros(0, dtype=np.int64), quot, coefs
    _, ids = np.unique(rem, axis=0, return_inverse=True)
    return ids.reshape(-1), quot, coefs


def _np_orbit(num, den, q, lim, budget):
    n = num.shape[0]
    top = lim * den
    out = np.zeros((n, 3), dtype=np.int64)

    def step(x):
        y = q * x
        over = y > top
        if over.any():
            y = np.where(over, y - ((y - top + den - 1) // den) * den, y)
        return y

    power = np.ones(n, dtype=np.int64)
    lam = np.ones(n, dtype=np.int64)
    tort = num.copy()
    hare = step(num)
    steps = 1
    active = tort != hare
    while active.any():
        if steps > budget:
            break
        reset = active & (power == lam)
        tort = np.where(reset, hare, tort)
        power = np.where(reset, power * 2, power)
        lam = np.where(reset, 0, lam)
        hare = np.where(active, step(hare), hare)
        lam = np.where(active, lam + 1, lam)
        active = tort != hare
        steps += 1
    failed = tort != hare
    hare = num.copy()
    for k in range(int(lam.max()) if n else 0):
        hare = np.where(lam > k, step(hare), hare)
    tort = num.copy()
    mu = np.zeros(n, dtype=np.int64)
    active = (tort != hare) & ~failed
    while active.any():
        tort = np.where(active, step(tort), tort)
        hare = np.where(active, step(hare), hare)
        mu = np.where(active, mu + 1, mu)
        active = (tort != hare) & ~failed
    out[:, 0] = np.where(failed, -1, mu)
    out[:, 1] = np.where(failed, 0, lam)
    out[:, 2] = np.where(failed, 0, tort)
    return out


def orbit_batch(num, den, q: int, lim: int, budget: int):
    """Eventual cycles of ``x -> qx`` followed by ``x -> x - 1`` while ``x > lim``.

    ``num/den`` are the starting rationals (``den > 0``).  Returns an
    ``(k, 3)`` array of ``(preperiod, period, cycle_start_numerator)``; a
    preperiod of -1 marks a row that exhausted ``budget`` steps.
    """
    num = np.ascontiguousarray(num, dtype=np.int64)
    den = np.ascontiguousarray(den, dtype=np.int64)
    if num.size and int(q) * int(lim) * int(den.max()) >= KEY_LIMIT:
        raise BudgetExceeded("orbit numerators would overflow 64-bit integers")
    if _BACKEND == "numba":
        return _nb_orbit(num, den, np.int64(q), np.int64(lim), np.int64(budget))
    return _np_orbit(num, den, q, lim, budget)
