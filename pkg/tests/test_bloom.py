import math

import numpy as np
import pytest

from rambo.bloom import (
    BloomFilterUnit,
    bfu_contains,
    bfu_fp_theoretical,
    bfu_insert,
    bfu_or_merge,
    bfu_size_for,
    classic_optimal_params,
    new_bfu,
)
from rambo.errors import IncompatibleFilterError, InvalidParameterError
from rambo.hashing import key_digest


def test_insert_then_contains():
    f = new_bfu(1024, 2, master_seed=7)
    d = key_digest("hello")
    assert not f.contains(d)
    bfu_insert(f, d)
    assert bfu_contains(f, d)
    assert f.insert_count == 1


def test_insert_is_idempotent_on_bits():
    f = new_bfu(512, 3, master_seed=1)
    d = key_digest(b"dup")
    f.insert(d)
    before = f.bits.copy()
    f.insert(d)
    assert np.array_equal(f.bits, before)
    assert f.insert_count == 2  # count tracks calls, not distinct keys


def test_popcount_bounded_by_inserts_times_eta():
    f = new_bfu(28860, 2, master_seed=42)
    rng = np.random.default_rng(0)
    digests = rng.integers(0, 1 << 64, size=1000, dtype=np.uint64)
    f.insert_many(digests)
    popcount = int(np.unpackbits(f.bits).sum())
    assert popcount <= 2000
    assert popcount > 1800  # collisions are rare at 10% load


def test_or_merge_is_union():
    f = new_bfu(2048, 2, master_seed=3)
    g = new_bfu(2048, 2, master_seed=3)
    ds_f = [key_digest(f"left{i}") for i in range(50)]
    ds_g = [key_digest(f"right{i}") for i in range(50)]
    f.insert_many(ds_f)
    g.insert_many(ds_g)

    merged = bfu_or_merge(f, g)
    assert merged.contains_many(np.array(ds_f + ds_g, dtype=np.uint64)).all()
    assert np.array_equal(merged.bits, f.bits | g.bits)
    assert merged.insert_count == 100
    # symmetric on bits
    assert np.array_equal(merged.bits, bfu_or_merge(g, f).bits)
    # f itself untouched by the functional form
    assert f.insert_count == 50


def test_or_merge_in_place_returns_self():
    f = new_bfu(256, 1, master_seed=5)
    g = new_bfu(256, 1, master_seed=5)
    g.insert(key_digest("x"))
    out = f.or_merge(g)
    assert out is f
    assert f.contains(key_digest("x"))


def test_or_merge_shape_mismatch():
    f = new_bfu(256, 2, master_seed=5)
    with pytest.raises(IncompatibleFilterError):
        f.or_merge(new_bfu(512, 2, master_seed=5))
    with pytest.raises(IncompatibleFilterError):
        f.or_merge(new_bfu(256, 3, master_seed=5))
    with pytest.raises(IncompatibleFilterError):
        f.or_merge(new_bfu(256, 2, master_seed=6))  # different hashers


def test_fp_theoretical_values():
    assert bfu_fp_theoretical(0, 1024, 2) == 0.0
    # one hash, n = m ln 2 inserts: rate 1/2
    m = 100000
    n = round(m * math.log(2))
    assert bfu_fp_theoretical(n, m, 1) == pytest.approx(0.5, abs=1e-5)
    # two hashes at half that load: (1/2)^2
    n2 = round(m * math.log(2) / 2)
    assert bfu_fp_theoretical(n2, m, 2) == pytest.approx(0.25, abs=1e-5)


def test_size_for_frozen_values():
    assert bfu_size_for(1000, 0.25, 2) == 2886
    assert bfu_size_for(1000, 0.01, 2) == 18983
    assert bfu_size_for(0, 0.01, 2) == 8
    assert bfu_size_for(1, 0.9999, 1) == 8  # tiny demand still floors at a byte


@pytest.mark.parametrize("n,p,eta", [(100, 0.1, 1), (1000, 0.01, 2), (5000, 0.001, 3), (17, 0.5, 4)])
def test_size_for_inverts_rate(n, p, eta):
    m = bfu_size_for(n, p, eta)
    assert bfu_fp_theoretical(n, m, eta) <= p
    # one bit fewer would overshoot (away from the floor)
    if m > 8:
        assert bfu_fp_theoretical(n, m - 1, eta) > p


def test_classic_optimal_params_values():
    assert classic_optimal_params(1.0 / 1024.0, 100) == (10, 1000)
    assert classic_optimal_params(0.5, 64) == (1, 64)
    assert classic_optimal_params(0.01, 1000) == (7, 6644)


def test_validation_errors():
    with pytest.raises(InvalidParameterError):
        new_bfu(0, 2, 0)
    with pytest.raises(InvalidParameterError):
        new_bfu(64, 0, 0)
    with pytest.raises(InvalidParameterError):
        bfu_fp_theoretical(-1, 64, 2)
    with pytest.raises(InvalidParameterError):
        bfu_fp_theoretical(1, 0, 2)
    with pytest.raises(InvalidParameterError):
        bfu_size_for(-1, 0.1, 2)
    with pytest.raises(InvalidParameterError):
        bfu_size_for(10, 0.0, 2)
    with pytest.raises(InvalidParameterError):
        bfu_size_for(10, 1.0, 2)
    with pytest.raises(InvalidParameterError):
        bfu_size_for(10, 0.1, 0)
    with pytest.raises(InvalidParameterError):
        classic_optimal_params(1.5, 10)
    with pytest.raises(InvalidParameterError):
        classic_optimal_params(0.1, -1)
    # validation failures are also plain ValueError for generic callers
    with pytest.raises(ValueError):
        bfu_size_for(10, 2.0, 2)


def test_measured_fp_tracks_theory():
    # m = 16n at eta = 2 predicts about 1.4%; check the measurement is in band
    n, eta = 2000, 2
    m = 16 * n
    f = new_bfu(m, eta, master_seed=99)
    rng = np.random.default_rng(1)
    members = rng.integers(0, 1 << 63, size=n, dtype=np.uint64)
    f.insert_many(members)
    probes = rng.integers(1 << 63, 1 << 64, size=100_000, dtype=np.uint64)
    measured = float(f.contains_many(probes).mean())
    predicted = bfu_fp_theoretical(n, m, eta)
    assert 0.5 * predicted <= measured <= 2.0 * predicted


def test_fill_fraction_and_fp_estimate():
    f = new_bfu(64, 1, master_seed=0)
    assert f.fill_fraction() == 0.0
    f.insert_many(np.arange(20, dtype=np.uint64))
    assert 0.0 < f.fill_fraction() <= 20 / 64
    assert f.fp_estimate() == bfu_fp_theoretical(20, 64, 1)


def test_bits_view_writes_through():
    # grid cells hand the unit a view; mutations must land in the backing array
    backing = np.zeros(16, dtype=np.uint8)
    template = new_bfu(64, 2, master_seed=4)
    unit = BloomFilterUnit(64, 2, template.a, template.b, backing[8:])
    unit.insert(key_digest("through"))
    assert backing[8:].any()
