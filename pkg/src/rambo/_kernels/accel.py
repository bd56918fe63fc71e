"""Numba kernels, bit-identical to the reference backend.

Every function mirrors one in ``reference`` and is cross-checked against it
in the test suite. Compiled lazily with cache=True so repeat runs skip the
JIT cost.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _mersenne_hash(a, b, x):
    # 64x64 -> 128 bit product in 32-bit limbs, then fold 2^64 = 8 mod P
    U32 = np.uint64(0xFFFFFFFF)
    P = np.uint64(2305843009213693951)
    a_lo = a & U32
    a_hi = a >> np.uint64(32)
    x_lo = x & U32
    x_hi = x >> np.uint64(32)
    ll = a_lo * x_lo
    lh = a_lo * x_hi
    hl = a_hi * x_lo
    hh = a_hi * x_hi
    t = (ll >> np.uint64(32)) + (lh & U32) + (hl & U32)
    lo = (ll & U32) | ((t & U32) << np.uint64(32))
    hi = hh + (lh >> np.uint64(32)) + (hl >> np.uint64(32)) + (t >> np.uint64(32))
    s = (hi << np.uint64(3)) + lo
    r = (s & P) + (s >> np.uint64(61))
    if s < lo:
        r += np.uint64(8)
    if r >= P:
        r -= P
    r += b
    if r >= P:
        r -= P
    return r


@njit(cache=True)
def cw_mod_many(a, b, xs):
    a = np.uint64(a)
    b = np.uint64(b)
    out = np.empty(xs.shape[0], dtype=np.uint64)
    for i in range(xs.shape[0]):
        out[i] = _mersenne_hash(a, b, xs[i])
    return out


@njit(cache=True)
def cw_hash_many(a, b, out_range, xs):
    a = np.uint64(a)
    b = np.uint64(b)
    rng = np.uint64(out_range)
    out = np.empty(xs.shape[0], dtype=np.uint64)
    for i in range(xs.shape[0]):
        out[i] = _mersenne_hash(a, b, xs[i]) % rng
    return out


@njit(cache=True)
def fnv1a_window_digests(data, k):
    n = data.shape[0] - k + 1
    if n <= 0:
        return np.empty(0, dtype=np.uint64)
    offset = np.uint64(0xCBF29CE484222325)
    prime = np.uint64(0x100000001B3)
    out = np.empty(n, dtype=np.uint64)
    for i in range(n):
        h = offset
        for j in range(k):
            h = (h ^ np.uint64(data[i + j])) * prime
        out[i] = h
    return out


@njit(cache=True)
def fnv1a_packed_digests(flat, starts, lengths):
    offset = np.uint64(0xCBF29CE484222325)
    prime = np.uint64(0x100000001B3)
    out = np.empty(starts.shape[0], dtype=np.uint64)
    for i in range(starts.shape[0]):
        h = offset
        for j in range(lengths[i]):
            h = (h ^ np.uint64(flat[starts[i] + j])) * prime
        out[i] = h
    return out


@njit(cache=True)
def bloom_set_many(bits, m, avec, bvec, xs):
    m64 = np.uint64(m)
    for j in range(avec.shape[0]):
        a = np.uint64(avec[j])
        b = np.uint64(bvec[j])
        for i in range(xs.shape[0]):
            pos = _mersenne_hash(a, b, xs[i]) % m64
            bits[pos >> np.uint64(3)] |= np.uint8(1 << (pos & np.uint64(7)))


@njit(cache=True)
def bloom_test_many(bits, m, avec, bvec, xs):
    m64 = np.uint64(m)
    out = np.ones(xs.shape[0], dtype=np.bool_)
    for j in range(avec.shape[0]):
        a = np.uint64(avec[j])
        b = np.uint64(bvec[j])
        for i in range(xs.shape[0]):
            if not out[i]:
                continue
            pos = _mersenne_hash(a, b, xs[i]) % m64
            if bits[pos >> np.uint64(3)] & np.uint8(1 << (pos & np.uint64(7))) == 0:
                out[i] = False
    return out


@njit(cache=True)
def grid_test_one(cells, m, avec, bvec, x):
    m64 = np.uint64(m)
    x = np.uint64(x)
    eta = avec.shape[0]
    hit = np.ones(cells.shape[0], dtype=np.bool_)
    bytes_ = np.empty(eta, dtype=np.int64)
    masks = np.empty(eta, dtype=np.uint8)
    for j in range(eta):
        pos = _mersenne_hash(np.uint64(avec[j]), np.uint64(bvec[j]), x) % m64
        bytes_[j] = np.int64(pos >> np.uint64(3))
        masks[j] = np.uint8(1 << (pos & np.uint64(7)))
    for c in range(cells.shape[0]):
        ok = True
        for j in range(eta):
            if cells[c, bytes_[j]] & masks[j] == 0:
                ok = False
                break
        hit[c] = ok
    return hit


@njit(cache=True)
def grid_test_many(cells, m, avec, bvec, xs):
    m64 = np.uint64(m)
    eta = avec.shape[0]
    n = xs.shape[0]
    C = cells.shape[0]
    # hash once per (hasher, term); branchless row sweeps keep writes
    # contiguous and let the gather vectorize
    hitT = np.ones((C, n), dtype=np.bool_)
    bytes_ = np.empty(n, dtype=np.int64)
    masks = np.empty(n, dtype=np.uint8)
    for j in range(eta):
        aj = np.uint64(avec[j])
        bj = np.uint64(bvec[j])
        for i in range(n):
            pos = _mersenne_hash(aj, bj, xs[i]) % m64
            bytes_[i] = np.int64(pos >> np.uint64(3))
            masks[i] = np.uint8(1 << (pos & np.uint64(7)))
        for c in range(C):
            row = cells[c]
            for i in range(n):
                hitT[c, i] &= (row[bytes_[i]] & masks[i]) != 0
    return hitT.T.copy()
