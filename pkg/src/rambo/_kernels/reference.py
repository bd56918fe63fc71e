"""Pure-numpy kernels.

Bit-exact reference for the numba backend: every function here must return
the same bytes as its twin in ``accel``. Multiplications mod the Mersenne
prime 2^61 - 1 are done in 32-bit limbs so the 128-bit product never leaves
uint64 arithmetic (numpy wraps unsigned overflow silently, which the carry
logic relies on).
"""

import numpy as np

MERSENNE_P = (1 << 61) - 1
FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3

_P61 = np.uint64(MERSENNE_P)
_U32 = np.uint64(0xFFFFFFFF)
_N3 = np.uint64(3)
_N32 = np.uint64(32)
_N61 = np.uint64(61)
_FNV_OFFSET = np.uint64(FNV_OFFSET)
_FNV_PRIME = np.uint64(FNV_PRIME)

# bit i of a filter lives in byte i >> 3 at position i & 7, LSB first
BIT_MASKS = np.array([1, 2, 4, 8, 16, 32, 64, 128], dtype=np.uint8)


def cw_mod_many(a, b, xs):
    """(a * x + b) mod (2^61 - 1) for every x, exact over the full u64 range."""
    a = np.uint64(a)
    b = np.uint64(b)
    x = np.asarray(xs, dtype=np.uint64)
    a_lo = a & _U32
    a_hi = a >> _N32
    x_lo = x & _U32
    x_hi = x >> _N32
    ll = a_lo * x_lo
    lh = a_lo * x_hi
    hl = a_hi * x_lo
    hh = a_hi * x_hi
    t = (ll >> _N32) + (lh & _U32) + (hl & _U32)
    lo = (ll & _U32) | ((t & _U32) << _N32)
    hi = hh + (lh >> _N32) + (hl >> _N32) + (t >> _N32)
    # a < 2^61 keeps hi < 2^61, so hi * 8 stays in uint64; 2^64 = 8 mod P
    h8 = hi << _N3
    s = h8 + lo
    carry = (s < lo).astype(np.uint64)
    r = (s & _P61) + (s >> _N61) + (carry << _N3)
    r = np.where(r >= _P61, r - _P61, r)
    r = r + b
    r = np.where(r >= _P61, r - _P61, r)
    return r


def cw_hash_many(a, b, out_range, xs):
    """Carter-Wegman hash of every x into [0, out_range)."""
    return cw_mod_many(a, b, xs) % np.uint64(out_range)


def fnv1a_window_digests(data, k):
    """FNV-1a digest of every length-k window (stride 1) of a byte array."""
    data = np.asarray(data, dtype=np.uint8)
    n = data.shape[0] - k + 1
    if n <= 0:
        return np.empty(0, dtype=np.uint64)
    d64 = data.astype(np.uint64)
    h = np.full(n, _FNV_OFFSET, dtype=np.uint64)
    for i in range(k):
        h = (h ^ d64[i : i + n]) * _FNV_PRIME
    return h


def fnv1a_packed_digests(flat, starts, lengths):
    """FNV-1a digests of variable-length terms packed into one byte array."""
    flat = np.asarray(flat, dtype=np.uint8).astype(np.uint64)
    starts = np.asarray(starts, dtype=np.int64)
    lengths = np.asarray(lengths, dtype=np.int64)
    h = np.full(starts.shape[0], _FNV_OFFSET, dtype=np.uint64)
    if lengths.size == 0:
        return h
    for i in range(int(lengths.max())):
        live = lengths > i
        h[live] = (h[live] ^ flat[starts[live] + i]) * _FNV_PRIME
    return h


def bloom_set_many(bits, m, avec, bvec, xs):
    """Set the eta bit positions of every digest in a filter byte array."""
    for j in range(avec.shape[0]):
        pos = cw_hash_many(avec[j], bvec[j], m, xs)
        np.bitwise_or.at(bits, (pos >> _N3).astype(np.int64), BIT_MASKS[pos & np.uint64(7)])


def bloom_test_many(bits, m, avec, bvec, xs):
    """Membership test of every digest against one filter byte array."""
    xs = np.asarray(xs, dtype=np.uint64)
    out = np.ones(xs.shape[0], dtype=np.bool_)
    for j in range(avec.shape[0]):
        pos = cw_hash_many(avec[j], bvec[j], m, xs)
        out &= (bits[(pos >> _N3).astype(np.int64)] & BIT_MASKS[pos & np.uint64(7)]) != 0
    return out


def grid_test_one(cells, m, avec, bvec, x):
    """Test one digest against every row of a (cells, nbytes) bit matrix."""
    xs = np.array([x], dtype=np.uint64)
    hit = np.ones(cells.shape[0], dtype=np.bool_)
    for j in range(avec.shape[0]):
        pos = int(cw_hash_many(avec[j], bvec[j], m, xs)[0])
        hit &= (cells[:, pos >> 3] & BIT_MASKS[pos & 7]) != 0
    return hit


def grid_test_many(cells, m, avec, bvec, xs):
    """Test many digests against every row; returns bool (n, cells)."""
    xs = np.asarray(xs, dtype=np.uint64)
    hit = np.ones((xs.shape[0], cells.shape[0]), dtype=np.bool_)
    for j in range(avec.shape[0]):
        pos = cw_hash_many(avec[j], bvec[j], m, xs)
        byte = (pos >> _N3).astype(np.int64)
        mask = BIT_MASKS[pos & np.uint64(7)]
        hit &= ((cells[:, byte] & mask) != 0).T
    return hit
