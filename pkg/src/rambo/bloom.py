"""Single Bloom filter unit and its sizing math.

A unit is eta Carter-Wegman hashers over one m-bit array, packed LSB-first
into bytes. Grid cells reuse this layout; the class here mostly serves
standalone use, tests, and merging.
"""

import math

import numpy as np

from . import _kernels
from .errors import IncompatibleFilterError, InvalidParameterError
from .hashing import derive_hasher


class BloomFilterUnit:
    """One m-bit filter with eta hash functions.

    bits may be a view into a larger grid; mutations write through.
    """

    __slots__ = ("m", "eta", "a", "b", "bits", "insert_count")

    def __init__(self, m, eta, a, b, bits, insert_count=0):
        self.m = int(m)
        self.eta = int(eta)
        self.a = a
        self.b = b
        self.bits = bits
        self.insert_count = int(insert_count)

    def insert(self, digest: int) -> None:
        _kernels.bloom_set_many(self.bits, self.m, self.a, self.b, np.array([digest], dtype=np.uint64))
        self.insert_count += 1

    def insert_many(self, digests) -> None:
        digests = np.asarray(digests, dtype=np.uint64)
        _kernels.bloom_set_many(self.bits, self.m, self.a, self.b, digests)
        self.insert_count += int(digests.shape[0])

    def contains(self, digest: int) -> bool:
        return bool(
            _kernels.bloom_test_many(self.bits, self.m, self.a, self.b, np.array([digest], dtype=np.uint64))[0]
        )

    def contains_many(self, digests) -> np.ndarray:
        return _kernels.bloom_test_many(self.bits, self.m, self.a, self.b, np.asarray(digests, dtype=np.uint64))

    def or_merge(self, other: "BloomFilterUnit") -> "BloomFilterUnit":
        """Bitwise-union another unit into this one (same m, eta, hashers)."""
        if self.m != other.m or self.eta != other.eta:
            raise IncompatibleFilterError(
                f"cannot merge units of shape (m={other.m}, eta={other.eta}) into (m={self.m}, eta={self.eta})"
            )
        if not (np.array_equal(self.a, other.a) and np.array_equal(self.b, other.b)):
            raise IncompatibleFilterError("cannot merge units with different hash functions")
        np.bitwise_or(self.bits, other.bits, out=self.bits)
        self.insert_count += other.insert_count
        return self

    def fill_fraction(self) -> float:
        """Fraction of the m bits currently set."""
        return int(np.unpackbits(np.ascontiguousarray(self.bits)).sum()) / self.m

    def fp_estimate(self) -> float:
        return bfu_fp_theoretical(self.insert_count, self.m, self.eta)


def new_bfu(m: int, eta: int, master_seed: int) -> BloomFilterUnit:
    """Fresh standalone unit with hashers derived from a master seed."""
    if m <= 0:
        raise InvalidParameterError(f"filter size must be positive, got {m}")
    if eta < 1:
        raise InvalidParameterError(f"hash count must be >= 1, got {eta}")
    pairs = [derive_hasher(master_seed, "bloom", j, m) for j in range(eta)]
    a = np.array([h.a for h in pairs], dtype=np.uint64)
    b = np.array([h.b for h in pairs], dtype=np.uint64)
    bits = np.zeros((m + 7) >> 3, dtype=np.uint8)
    return BloomFilterUnit(m, eta, a, b, bits)


def bfu_fp_theoretical(n: int, m: int, eta: int) -> float:
    """Expected false positive rate after n distinct inserts: (1 - e^(-eta n / m))^eta."""
    if m <= 0:
        raise InvalidParameterError(f"filter size must be positive, got {m}")
    if n < 0 or eta < 1:
        raise InvalidParameterError(f"bad filter load (n={n}, eta={eta})")
    return (1.0 - math.exp(-eta * n / m)) ** eta


def bfu_size_for(n: int, p: float, eta: int) -> int:
    """Bits needed so eta hashes over n keys stay at false positive rate p.

    Inverts the theoretical rate for fixed eta: m = ceil(-eta n / ln(1 - p^(1/eta))),
    floored at 8 so degenerate inputs still yield one usable byte.
    """
    if n < 0:
        raise InvalidParameterError(f"key count must be >= 0, got {n}")
    if not 0.0 < p < 1.0:
        raise InvalidParameterError(f"target rate must be in (0, 1), got {p}")
    if eta < 1:
        raise InvalidParameterError(f"hash count must be >= 1, got {eta}")
    if n == 0:
        return 8
    m = math.ceil(-eta * n / math.log(1.0 - p ** (1.0 / eta)))
    return max(8, m)


def classic_optimal_params(p: float, n: int) -> tuple:
    """Joint (eta, m) from the familiar closed form: eta = round(log2(1/p)),
    m = ceil(n log2(1/p)).

    Note m here is a factor 1/ln 2 below the fixed-eta inversion of
    bfu_size_for; grid sizing uses bfu_size_for so the realized rate matches
    the p plugged into the false-positive model. Kept verbatim, do not "fix".
    """
    if n < 0:
        raise InvalidParameterError(f"key count must be >= 0, got {n}")
    if not 0.0 < p < 1.0:
        raise InvalidParameterError(f"target rate must be in (0, 1), got {p}")
    bits_per_key = math.log2(1.0 / p)
    eta = max(1, round(bits_per_key))
    m = math.ceil(n * bits_per_key)
    return eta, m


def bfu_insert(f: BloomFilterUnit, digest: int) -> None:
    f.insert(digest)


def bfu_contains(f: BloomFilterUnit, digest: int) -> bool:
    return f.contains(digest)


def bfu_or_merge(f: BloomFilterUnit, g: BloomFilterUnit) -> BloomFilterUnit:
    """Union of two compatible units as a new standalone unit."""
    merged = BloomFilterUnit(f.m, f.eta, f.a, f.b, f.bits.copy(), f.insert_count)
    return merged.or_merge(g)
