"""Both kernel backends against big-integer oracles and each other.

The numba functions must be bit-identical to the numpy reference; index
files built under either backend have to compare equal, so nothing here
is allowed to drift by even one bit.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rambo._kernels import accel, reference
from rambo.hashing import MERSENNE_P, key_digest

BACKENDS = [reference, accel]
IDS = ["numpy", "numba"]


def _rand_pair(rng):
    a = int(rng.integers(1, MERSENNE_P)) | 1
    b = int(rng.integers(0, MERSENNE_P))
    return np.uint64(a), np.uint64(b)


@pytest.mark.parametrize("kern", BACKENDS, ids=IDS)
def test_mod_many_matches_bigint_oracle(kern):
    rng = np.random.default_rng(101)
    xs = rng.integers(0, 1 << 64, size=512, dtype=np.uint64)
    xs[:4] = [0, 1, MERSENNE_P, (1 << 64) - 1]
    for trial in range(20):
        a, b = _rand_pair(rng)
        got = kern.cw_mod_many(a, b, xs)
        want = [(int(a) * int(x) + int(b)) % MERSENNE_P for x in xs]
        assert got.tolist() == want


@pytest.mark.parametrize("kern", BACKENDS, ids=IDS)
def test_hash_many_matches_bigint_oracle(kern):
    rng = np.random.default_rng(55)
    xs = rng.integers(0, 1 << 64, size=256, dtype=np.uint64)
    for out_range in (1, 2, 7, 4096, MERSENNE_P - 1):
        a, b = _rand_pair(rng)
        got = kern.cw_hash_many(a, b, np.uint64(out_range), xs)
        want = [((int(a) * int(x) + int(b)) % MERSENNE_P) % out_range for x in xs]
        assert got.tolist() == want


@pytest.mark.parametrize("kern", BACKENDS, ids=IDS)
def test_window_digests_match_scalar_digest(kern):
    data = np.frombuffer(b"the quick brown fox jumps over it", dtype=np.uint8)
    for k in (1, 3, 7, len(data)):
        got = kern.fnv1a_window_digests(data, k)
        raw = data.tobytes()
        want = [key_digest(raw[i : i + k]) for i in range(len(raw) - k + 1)]
        assert got.tolist() == want
    assert kern.fnv1a_window_digests(data, len(data) + 1).shape == (0,)


@pytest.mark.parametrize("kern", BACKENDS, ids=IDS)
def test_packed_digests_match_scalar_digest(kern):
    terms = [b"", b"a", b"ACG", b"ACT", b"longer term with spaces", b"\x00\xff\x7f"]
    flat = np.frombuffer(b"".join(terms), dtype=np.uint8)
    lengths = np.array([len(t) for t in terms], dtype=np.int64)
    starts = np.concatenate([[0], np.cumsum(lengths[:-1])]).astype(np.int64)
    got = kern.fnv1a_packed_digests(flat, starts, lengths)
    assert got.tolist() == [key_digest(t) for t in terms]


@pytest.mark.parametrize("kern", BACKENDS, ids=IDS)
def test_bloom_set_and_test_round_trip(kern):
    rng = np.random.default_rng(3)
    m = 4096
    avec = np.array([_rand_pair(rng)[0] for _ in range(2)], dtype=np.uint64)
    bvec = np.array([_rand_pair(rng)[1] for _ in range(2)], dtype=np.uint64)
    bits = np.zeros((m + 7) // 8, dtype=np.uint8)
    xs = rng.integers(0, 1 << 64, size=200, dtype=np.uint64)
    kern.bloom_set_many(bits, np.uint64(m), avec, bvec, xs)
    assert bool(kern.bloom_test_many(bits, np.uint64(m), avec, bvec, xs).all())
    # set positions match the scalar formula exactly
    want = np.zeros_like(bits)
    for a, b in zip(avec, bvec):
        for x in xs:
            pos = ((int(a) * int(x) + int(b)) % MERSENNE_P) % m
            want[pos >> 3] |= 1 << (pos & 7)
    assert np.array_equal(bits, want)


@pytest.mark.parametrize("kern", BACKENDS, ids=IDS)
def test_bloom_set_handles_duplicate_positions(kern):
    # repeated digests must OR, not toggle or drop
    rng = np.random.default_rng(9)
    m = 64
    avec = np.array([_rand_pair(rng)[0]], dtype=np.uint64)
    bvec = np.array([_rand_pair(rng)[1]], dtype=np.uint64)
    bits = np.zeros(8, dtype=np.uint8)
    xs = np.array([42, 42, 42, 7, 7], dtype=np.uint64)
    kern.bloom_set_many(bits, np.uint64(m), avec, bvec, xs)
    assert int(np.unpackbits(bits).sum()) <= 2


@pytest.mark.parametrize("kern", BACKENDS, ids=IDS)
def test_grid_test_matches_per_cell_bloom_test(kern):
    rng = np.random.default_rng(17)
    m = 512
    cells = rng.integers(0, 256, size=(12, (m + 7) // 8), dtype=np.uint8)
    avec = np.array([_rand_pair(rng)[0] for _ in range(3)], dtype=np.uint64)
    bvec = np.array([_rand_pair(rng)[1] for _ in range(3)], dtype=np.uint64)
    xs = rng.integers(0, 1 << 64, size=40, dtype=np.uint64)
    many = kern.grid_test_many(cells, np.uint64(m), avec, bvec, xs)
    assert many.shape == (40, 12)
    for i, x in enumerate(xs):
        one = kern.grid_test_one(cells, np.uint64(m), avec, bvec, np.uint64(x))
        assert np.array_equal(one, many[i])
        for c in range(cells.shape[0]):
            row = np.ascontiguousarray(cells[c])
            single = kern.bloom_test_many(row, np.uint64(m), avec, bvec, np.array([x], dtype=np.uint64))
            assert bool(single[0]) == bool(one[c])


def test_backends_agree_on_random_workloads():
    rng = np.random.default_rng(23)
    for trial in range(10):
        m = int(rng.integers(8, 5000))
        eta = int(rng.integers(1, 5))
        avec = np.array([_rand_pair(rng)[0] for _ in range(eta)], dtype=np.uint64)
        bvec = np.array([_rand_pair(rng)[1] for _ in range(eta)], dtype=np.uint64)
        xs = rng.integers(0, 1 << 64, size=300, dtype=np.uint64)
        bits_a = np.zeros((m + 7) // 8, dtype=np.uint8)
        bits_b = np.zeros_like(bits_a)
        reference.bloom_set_many(bits_a, np.uint64(m), avec, bvec, xs)
        accel.bloom_set_many(bits_b, np.uint64(m), avec, bvec, xs)
        assert np.array_equal(bits_a, bits_b)
        probes = rng.integers(0, 1 << 64, size=500, dtype=np.uint64)
        assert np.array_equal(
            reference.bloom_test_many(bits_a, np.uint64(m), avec, bvec, probes),
            accel.bloom_test_many(bits_b, np.uint64(m), avec, bvec, probes),
        )


@settings(max_examples=60, deadline=None)
@given(
    a=st.integers(min_value=1, max_value=MERSENNE_P - 1),
    b=st.integers(min_value=0, max_value=MERSENNE_P - 1),
    out_range=st.integers(min_value=1, max_value=1 << 62),
    xs=st.lists(st.integers(min_value=0, max_value=(1 << 64) - 1), min_size=1, max_size=40),
)
def test_hash_many_property(a, b, out_range, xs):
    arr = np.array(xs, dtype=np.uint64)
    want = [((a * x + b) % MERSENNE_P) % out_range for x in xs]
    got_ref = reference.cw_hash_many(np.uint64(a), np.uint64(b), np.uint64(out_range), arr)
    got_jit = accel.cw_hash_many(np.uint64(a), np.uint64(b), np.uint64(out_range), arr)
    assert got_ref.tolist() == want
    assert got_jit.tolist() == want
