"""Bit-exact index serialization.

Layout (all integers little-endian): 44-byte header (magic "RMBO",
version, B, R, eta, m, k, master_seed, shards, local_b, shard_ordinal, K),
registry as K length-prefixed UTF-8 names in ID order, then per table and
bucket a u32 count plus that many sorted u32 member IDs, then the raw cell
bit arrays in the same (table, bucket) order, LSB-first within each byte,
and a trailing CRC32 (IEEE) of everything before it.

Two saves of equal indexes are byte-identical, which the fold/shard
equivalence tests lean on. Per-cell insert counters are not persisted; a
loaded index reports zero observed load.
"""

import os
import struct
import tempfile
import zlib

import numpy as np

from .core import RamboIndex, RamboParams, SetRegistry, stack_indexes
from .errors import CorruptIndexError, InconsistentIndexError, InvalidParameterError

MAGIC = b"RMBO"
VERSION = 1

_HEADER = struct.Struct("<4sHIHHQHQHIHI")
_U16 = struct.Struct("<H")
_U32 = struct.Struct("<I")


def index_to_bytes(idx: RamboIndex) -> bytes:
    p = idx.params
    out = bytearray(
        _HEADER.pack(
            MAGIC, VERSION, p.B, p.R, p.eta, p.m, p.k,
            p.master_seed, p.shards, p.local_b, p.shard_ordinal, len(idx.registry),
        )
    )
    for name in idx.registry:
        raw = name.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise InvalidParameterError(f"set name of {len(raw)} bytes is too long to serialize")
        out += _U16.pack(len(raw))
        out += raw
    for r in range(p.R):
        for b in range(p.B):
            ids = idx.members[r][b]
            out += _U32.pack(len(ids))
            out += np.asarray(ids, dtype="<u4").tobytes()
    out += idx.grid_bits.tobytes()
    out += _U32.pack(zlib.crc32(out) & 0xFFFFFFFF)
    return bytes(out)


def save_index(idx: RamboIndex, path) -> None:
    """Atomic write: the file appears complete or not at all."""
    data = index_to_bytes(idx)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".rambo-tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def index_from_bytes(data: bytes) -> RamboIndex:
    if len(data) < _HEADER.size + 4:
        raise CorruptIndexError(f"file of {len(data)} bytes is too short to be an index")
    (stored_crc,) = _U32.unpack_from(data, len(data) - 4)
    if zlib.crc32(data[:-4]) & 0xFFFFFFFF != stored_crc:
        raise CorruptIndexError("checksum mismatch; file is truncated or corrupted")
    magic, version, B, R, eta, m, k, seed, shards, local_b, ordinal, K = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise CorruptIndexError(f"bad magic {magic!r}")
    if version != VERSION:
        raise CorruptIndexError(f"unsupported format version {version}")
    params = RamboParams(B=B, R=R, eta=eta, m=m, k=k, master_seed=seed,
                         shards=shards, local_b=local_b, shard_ordinal=ordinal)
    try:
        params.validate()
        idx = RamboIndex(params)
    except InvalidParameterError as exc:
        raise InconsistentIndexError(f"header parameters are not a valid grid: {exc}") from exc

    offset = _HEADER.size
    names = []
    for _ in range(K):
        if offset + 2 > len(data) - 4:
            raise CorruptIndexError("registry runs past end of file")
        (ln,) = _U16.unpack_from(data, offset)
        offset += 2
        if offset + ln > len(data) - 4:
            raise CorruptIndexError("registry runs past end of file")
        try:
            names.append(data[offset : offset + ln].decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise InconsistentIndexError(f"set name {len(names)} is not valid UTF-8") from exc
        offset += ln
    if len(set(names)) != K:
        raise InconsistentIndexError("registry contains duplicate set names")
    idx.registry = SetRegistry(names)

    for r in range(R):
        seen = np.zeros(K, dtype=bool)
        for b in range(B):
            if offset + 4 > len(data) - 4:
                raise CorruptIndexError("member lists run past end of file")
            (count,) = _U32.unpack_from(data, offset)
            offset += 4
            if offset + 4 * count > len(data) - 4:
                raise CorruptIndexError("member lists run past end of file")
            ids = np.frombuffer(data, dtype="<u4", count=count, offset=offset)
            offset += 4 * count
            if count and (ids[-1] >= K or np.any(ids[1:] <= ids[:-1])):
                raise InconsistentIndexError(
                    f"member list of table {r} bucket {b} is not a sorted set of known IDs"
                )
            if count and seen[ids].any():
                raise InconsistentIndexError(f"set ID assigned to two buckets of table {r}")
            seen[ids] = True
            idx.members[r][b] = [int(i) for i in ids]
        if not seen.all():
            raise InconsistentIndexError(
                f"table {r} does not assign every one of the {K} sets to a bucket"
            )

    grid_size = R * B * ((m + 7) >> 3)
    if offset + grid_size + 4 != len(data):
        raise CorruptIndexError("cell bit section has the wrong size")
    grid = np.frombuffer(data, dtype=np.uint8, count=grid_size, offset=offset)
    idx.grid_bits[:] = grid.reshape(idx.grid_bits.shape)
    return idx


def load_index(path) -> RamboIndex:
    """Read an index file, verifying checksum and partition integrity."""
    with open(path, "rb") as fh:
        return index_from_bytes(fh.read())


def stack_shards(paths) -> RamboIndex:
    """Load shard piece files and assemble the full grid."""
    return stack_indexes([load_index(p) for p in paths])
