"""Universal hashing over the Mersenne prime 2^61 - 1.

Terms are first collapsed to a 64-bit FNV-1a digest; every downstream hash
(bucket placement, shard routing, filter bits) is a Carter-Wegman pair
(a, b) applied to that digest. Pairs are derived from one master seed via a
splitmix-style chain, so an index is reproducible from (seed, geometry)
alone and two roles never share a pair.
"""

from dataclasses import dataclass

from .errors import InvalidParameterError

MERSENNE_P = (1 << 61) - 1

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

# domain separation tags; renumbering breaks every saved index
_ROLE_TAGS = {"partition": 1, "shard_router": 2, "bloom": 3}


def key_digest(term) -> int:
    """64-bit FNV-1a digest of a term (str is digested as UTF-8)."""
    if isinstance(term, str):
        term = term.encode("utf-8")
    h = FNV_OFFSET
    for byte in term:
        h = ((h ^ byte) * FNV_PRIME) & _MASK64
    return h


def _fmix64(z: int) -> int:
    z &= _MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return z


@dataclass(frozen=True)
class UniversalHasher:
    """One Carter-Wegman pair with its output range."""

    a: int
    b: int
    out_range: int

    def hash(self, x: int) -> int:
        return ((self.a * x + self.b) % MERSENNE_P) % self.out_range


def derive_hasher(master_seed: int, role: str, index: int, out_range: int) -> UniversalHasher:
    """Derive the (role, index) hasher of a seed.

    The pair (a, b) depends only on (master_seed, role, index), never on
    out_range, so the same logical hasher can be re-ranged (folding halves
    bucket counts without touching the underlying pair). a is forced odd
    and nonzero.
    """
    if out_range <= 0:
        raise InvalidParameterError(f"hash range must be positive, got {out_range}")
    if index < 0:
        raise InvalidParameterError(f"hasher index must be >= 0, got {index}")
    tag = _ROLE_TAGS.get(role)
    if tag is None:
        raise InvalidParameterError(f"unknown hasher role {role!r}")
    x = _fmix64(master_seed + _GOLDEN * (tag + 1))
    x = _fmix64(x + _GOLDEN * (index + 1))
    a_raw = _fmix64(x + _GOLDEN)
    b_raw = _fmix64(x + 2 * _GOLDEN)
    a = 2 * (a_raw % ((MERSENNE_P - 1) // 2)) + 1
    b = b_raw % MERSENNE_P
    return UniversalHasher(a=a, b=b, out_range=out_range)


def universal_hash(hasher: UniversalHasher, x: int) -> int:
    """Apply a hasher to a 64-bit digest."""
    return hasher.hash(x)
