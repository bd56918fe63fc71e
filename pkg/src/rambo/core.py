"""The B x R filter grid: build, query, fold, sharded assembly.

K named sets are hashed into one of B cells per table, independently for
each of R tables; a cell's Bloom filter holds the union of the terms of
every set assigned to it. A term query probes all B*R cells, unions the
set-ID lists of hit cells within each table, and intersects the unions
across tables. Answers are supersets of the truth: a set can surface by
filter or placement collision, but an inserted (term, set) pair is never
missed.

Placement uses the set NAME digest, never term bytes, so the member lists
of a table always partition the ID space. With shards > 1 a router hash
tau picks a shard and the global cell index is local_b * tau + phi_r,
which lets independently built shard grids stack by block concatenation.

Queries are read-only and safe under any concurrency once construction is
done; during construction a given cell must have at most one writer (the
sharded build is the sanctioned parallel path, shard grids are disjoint).
"""

import heapq
from dataclasses import dataclass, replace
from itertools import islice

import numpy as np

from . import _kernels
from .bloom import BloomFilterUnit, bfu_size_for
from .errors import (
    CannotFoldError,
    IncompatibleShardError,
    InvalidParameterError,
    InvalidQueryError,
)
from .hashing import derive_hasher, key_digest

_INSERT_CHUNK = 1 << 16


@dataclass
class RamboParams:
    """Grid geometry. B = shards * local_b except on an unstacked shard
    piece, whose own grid is only local_b wide (B == local_b, shards > 1,
    shard_ordinal marks which block of the full grid it becomes)."""

    B: int
    R: int
    eta: int = 2
    m: int = 0  # bits per cell filter; 0 = size at build time
    k: int = 31  # default window length for sequence queries
    master_seed: int = 0
    shards: int = 1
    local_b: int = 0  # 0 = B // shards
    shard_ordinal: int = 0

    def __post_init__(self):
        if self.local_b == 0:
            shards = max(self.shards, 1)
            if self.B % shards == 0:
                self.local_b = self.B // shards

    def validate(self) -> None:
        if self.B < 2:
            raise InvalidParameterError(f"need at least 2 buckets per table, got B={self.B}")
        if self.R < 1:
            raise InvalidParameterError(f"need at least 1 table, got R={self.R}")
        if self.eta < 1:
            raise InvalidParameterError(f"need at least 1 filter hash, got eta={self.eta}")
        if self.m < 0:
            raise InvalidParameterError(f"filter size must be >= 0, got m={self.m}")
        if self.k < 1:
            raise InvalidParameterError(f"window length must be >= 1, got k={self.k}")
        if self.shards < 1:
            raise InvalidParameterError(f"shard count must be >= 1, got shards={self.shards}")
        if not 0 <= self.master_seed < (1 << 64):
            raise InvalidParameterError("master_seed must fit in 64 bits")
        if self.shards == 1:
            if self.local_b != self.B:
                raise InvalidParameterError(
                    f"monolithic index needs local_b == B, got local_b={self.local_b}, B={self.B}"
                )
            if self.shard_ordinal != 0:
                raise InvalidParameterError("shard_ordinal must be 0 when shards == 1")
        else:
            full = self.B == self.shards * self.local_b
            piece = self.B == self.local_b
            if not (full or piece):
                raise InvalidParameterError(
                    f"B={self.B} matches neither shards*local_b={self.shards * self.local_b} "
                    f"nor a single shard piece of local_b={self.local_b}"
                )
            if not 0 <= self.shard_ordinal < self.shards:
                raise InvalidParameterError(
                    f"shard_ordinal {self.shard_ordinal} outside [0, {self.shards})"
                )
            if full and self.shard_ordinal != 0:
                raise InvalidParameterError("assembled index must have shard_ordinal 0")

    @property
    def is_shard_piece(self) -> bool:
        return self.shards > 1 and self.B == self.local_b


class SetRegistry:
    """Bijection between set names and dense integer IDs, in insertion order."""

    __slots__ = ("names", "ids")

    def __init__(self, names=()):
        self.names = []
        self.ids = {}
        for name in names:
            self.add(name)

    def add(self, name: str) -> int:
        sid = self.ids.get(name)
        if sid is None:
            sid = len(self.names)
            self.ids[name] = sid
            self.names.append(name)
        return sid

    def id_of(self, name: str) -> int:
        return self.ids[name]

    def name_of(self, sid: int) -> str:
        return self.names[sid]

    def __len__(self):
        return len(self.names)

    def __contains__(self, name):
        return name in self.ids

    def __iter__(self):
        return iter(self.names)


@dataclass
class QueryResult:
    """Matched IDs plus the cost counters the query actually incurred."""

    set_ids: list
    bfu_probes: int
    intersect_work: int


def _digest_terms(terms) -> np.ndarray:
    """Batch 64-bit digests of a materialized chunk of terms."""
    encoded = [t.encode("utf-8") if isinstance(t, str) else bytes(t) for t in terms]
    lengths = np.array([len(t) for t in encoded], dtype=np.int64)
    starts = np.zeros(len(encoded), dtype=np.int64)
    if len(encoded) > 1:
        np.cumsum(lengths[:-1], out=starts[1:])
    flat = np.frombuffer(b"".join(encoded), dtype=np.uint8)
    return _kernels.fnv1a_packed_digests(flat, starts, lengths)


class RamboIndex:
    """Live grid. Construct through new_index so m is sized; the raw
    constructor expects fully resolved params."""

    def __init__(self, params: RamboParams):
        params.validate()
        if params.m < 8:
            raise InvalidParameterError(f"filter size must be >= 8 bits, got m={params.m}")
        self.params = params
        self.registry = SetRegistry()
        self._nbytes = (params.m + 7) >> 3
        self.grid_bits = np.zeros((params.R, params.B, self._nbytes), dtype=np.uint8)
        self.insert_counts = np.zeros((params.R, params.B), dtype=np.int64)
        self.members = [[[] for _ in range(params.B)] for _ in range(params.R)]
        seed = params.master_seed
        self._partition = [derive_hasher(seed, "partition", r, params.local_b) for r in range(params.R)]
        self._router = derive_hasher(seed, "shard_router", 0, params.shards)
        blooms = [derive_hasher(seed, "bloom", j, params.m) for j in range(params.eta)]
        self.bloom_a = np.array([h.a for h in blooms], dtype=np.uint64)
        self.bloom_b = np.array([h.b for h in blooms], dtype=np.uint64)

    # -- construction ------------------------------------------------------

    def _cells_of_name(self, name: str) -> list:
        """Global bucket per table for a set name; validates shard routing."""
        digest = key_digest(name)
        shard = self._router.hash(digest)
        p = self.params
        if p.is_shard_piece:
            if shard != p.shard_ordinal:
                raise IncompatibleShardError(
                    f"set {name!r} routes to shard {shard}, not this piece's shard {p.shard_ordinal}"
                )
            offset = 0
        else:
            offset = p.local_b * shard
        return [offset + h.hash(digest) for h in self._partition]

    def insert_set(self, name: str, terms) -> int:
        """Register a set and stream its terms into its cell of every table.

        Re-inserting an existing name appends terms to the same set. Terms
        are consumed exactly once.
        """
        cells = self._cells_of_name(name)
        fresh = name not in self.registry
        sid = self.registry.add(name)
        if fresh:
            for r, b in enumerate(cells):
                self.members[r][b].append(sid)
        m = self.params.m
        it = iter(terms)
        while True:
            chunk = list(islice(it, _INSERT_CHUNK))
            if not chunk:
                break
            digests = np.unique(_digest_terms(chunk))
            for r, b in enumerate(cells):
                _kernels.bloom_set_many(self.grid_bits[r, b], m, self.bloom_a, self.bloom_b, digests)
                self.insert_counts[r, b] += digests.shape[0]
        return sid

    # -- query -------------------------------------------------------------

    def _candidates(self, digest: int):
        """(ids, probes, work) for one digest: per-table member union of hit
        cells, intersected across tables in ascending order with early exit
        once the running intersection is empty. All B*R cells are probed."""
        B, R = self.params.B, self.params.R
        flat = self.grid_bits.reshape(B * R, self._nbytes)
        hits = _kernels.grid_test_one(flat, self.params.m, self.bloom_a, self.bloom_b, np.uint64(digest))
        work = 0
        running = None
        for r in range(R):
            union = []
            row = self.members[r]
            for b in np.flatnonzero(hits[r * B : (r + 1) * B]):
                union.extend(row[b])
            work += len(union)
            running = set(union) if running is None else running.intersection(union)
            if not running:
                break
        return running, B * R, work

    def query_term(self, q) -> QueryResult:
        """Every set that may contain q; never misses a set that does."""
        if len(q) == 0:
            raise InvalidQueryError("cannot query an empty term")
        ids, probes, work = self._candidates(key_digest(q))
        return QueryResult(sorted(ids), probes, work)

    def query_terms(self, queries, mode: str = "term_at_a_time") -> QueryResult:
        """Sets that may contain ALL the given terms.

        term_at_a_time intersects per-term answers and stops early when the
        running intersection dies; bucket_conjunction admits a cell only if
        every term hits it, then resolves members once. Both are supersets
        of the truth; bucket_conjunction is never looser.
        """
        queries = list(queries)
        if not queries:
            raise InvalidQueryError("cannot query an empty term collection")
        if any(len(q) == 0 for q in queries):
            raise InvalidQueryError("cannot query an empty term")
        digests = _digest_terms(queries)
        first = np.sort(np.unique(digests, return_index=True)[1])
        digests = digests[first]
        if mode == "term_at_a_time":
            running = None
            probes = work = 0
            for digest in digests:
                ids, p, w = self._candidates(int(digest))
                probes += p
                work += w
                running = ids if running is None else running & ids
                if not running:
                    break
            return QueryResult(sorted(running), probes, work)
        if mode != "bucket_conjunction":
            raise InvalidQueryError(f"unknown query mode {mode!r}")
        B, R = self.params.B, self.params.R
        flat = self.grid_bits.reshape(B * R, self._nbytes)
        hitmat = _kernels.grid_test_many(flat, self.params.m, self.bloom_a, self.bloom_b, digests)
        cell_ok = hitmat.all(axis=0)
        probes = digests.shape[0] * B * R
        work = 0
        running = None
        for r in range(R):
            union = []
            row = self.members[r]
            for b in np.flatnonzero(cell_ok[r * B : (r + 1) * B]):
                union.extend(row[b])
            work += len(union)
            running = set(union) if running is None else running.intersection(union)
            if not running:
                break
        return QueryResult(sorted(running), probes, work)

    def query_sequence(self, seq, k: int = 0) -> QueryResult:
        """Sets that may contain every length-k window of seq.

        Window order is preserved (duplicates collapsed) and the scan stops
        at the first window that kills the candidate set, so a single absent
        window ends the query early.
        """
        if isinstance(seq, str):
            seq = seq.encode("utf-8")
        k = k or self.params.k
        if k < 1:
            raise InvalidQueryError(f"window length must be >= 1, got {k}")
        if len(seq) < k:
            raise InvalidQueryError(f"sequence of {len(seq)} bytes is shorter than window {k}")
        data = np.frombuffer(bytes(seq), dtype=np.uint8)
        digests = _kernels.fnv1a_window_digests(data, k)
        first = np.sort(np.unique(digests, return_index=True)[1])
        running = None
        probes = work = 0
        for digest in digests[first]:
            ids, p, w = self._candidates(int(digest))
            probes += p
            work += w
            running = ids if running is None else running & ids
            if not running:
                break
        return QueryResult(sorted(running), probes, work)

    # -- structure ---------------------------------------------------------

    def bfu(self, r: int, b: int) -> BloomFilterUnit:
        """View of one cell as a standalone filter (bits shared, count is a
        snapshot)."""
        return BloomFilterUnit(
            self.params.m, self.params.eta, self.bloom_a, self.bloom_b,
            self.grid_bits[r, b], int(self.insert_counts[r, b]),
        )

    def fill_fractions(self) -> np.ndarray:
        """Per-cell fraction of set bits, shape (R, B)."""
        ones = np.unpackbits(self.grid_bits, axis=2).sum(axis=2, dtype=np.int64)
        return ones / self.params.m

    def fold(self) -> "RamboIndex":
        """Halve the grid by OR-ing the top half of the buckets onto the
        bottom half. Shrinks shards when the index was built sharded, B
        otherwise; either count must be even. Query answers of the folded
        index are supersets of the originals.
        """
        p = self.params
        if p.is_shard_piece:
            raise CannotFoldError("cannot fold an unstacked shard piece; stack first")
        if p.B < 4:
            raise CannotFoldError(f"folding B={p.B} would leave fewer than 2 buckets")
        if p.shards > 1:
            if p.shards % 2:
                raise CannotFoldError(f"cannot fold {p.shards} shards in half")
            half = replace(p, B=p.B // 2, shards=p.shards // 2,
                           local_b=p.B // 2 if p.shards == 2 else p.local_b)
        else:
            if p.B % 2:
                raise CannotFoldError(f"cannot fold {p.B} buckets in half")
            half = replace(p, B=p.B // 2, local_b=p.B // 2)
        out = RamboIndex(half)
        newB = half.B
        np.bitwise_or(self.grid_bits[:, :newB, :], self.grid_bits[:, newB:, :], out=out.grid_bits)
        out.insert_counts[:] = self.insert_counts[:, :newB] + self.insert_counts[:, newB:]
        out.registry = SetRegistry(self.registry.names)
        for r in range(p.R):
            for b in range(newB):
                out.members[r][b] = list(heapq.merge(self.members[r][b], self.members[r][b + newB]))
        return out


def new_index(params: RamboParams, expected_terms_per_set: int = 0,
              target_p: float = 0.01, expected_sets: int = 0) -> RamboIndex:
    """Empty grid with m sized from the estimated per-cell load.

    Per-cell load is expected_terms_per_set * ceil(expected_sets / B);
    expected_sets defaults to B (one set per cell). An explicit params.m
    wins over sizing.
    """
    params.validate()
    if expected_terms_per_set < 0:
        raise InvalidParameterError(f"expected terms per set must be >= 0, got {expected_terms_per_set}")
    if params.m == 0:
        full_b = params.local_b * params.shards
        sets_per_cell = -(-max(expected_sets, full_b) // full_b)
        m = bfu_size_for(expected_terms_per_set * sets_per_cell, target_p, params.eta)
        params = replace(params, m=m)
    return RamboIndex(params)


def shard_placement(params: RamboParams, set_name, r: int) -> int:
    """Global bucket of a set name in table r under two-level placement:
    local_b * tau(name) + phi_r(name)."""
    if not 0 <= r < params.R:
        raise InvalidParameterError(f"table index {r} outside [0, {params.R})")
    digest = key_digest(set_name)
    tau = derive_hasher(params.master_seed, "shard_router", 0, params.shards).hash(digest)
    phi = derive_hasher(params.master_seed, "partition", r, params.local_b).hash(digest)
    return params.local_b * tau + phi


def _materialize(corpus) -> list:
    pairs = corpus.items() if hasattr(corpus, "items") else corpus
    out = [(name, terms if isinstance(terms, (list, tuple, set, frozenset)) else list(terms))
           for name, terms in pairs]
    out.sort(key=lambda pair: pair[0])
    return out


def _sized_params(pairs, params: RamboParams, target_p: float) -> RamboParams:
    if params.m:
        return params
    kest = len(pairs)
    avg = round(sum(len(set(t)) for _, t in pairs) / kest) if kest else 0
    full_b = params.local_b * params.shards
    sets_per_cell = -(-max(kest, 1) // full_b)
    return replace(params, m=bfu_size_for(avg * sets_per_cell, target_p, params.eta))


def build_index(corpus, params: RamboParams, target_p: float = 0.01) -> RamboIndex:
    """One-shot build over a materialized corpus (dict or (name, terms)
    pairs). Sets are inserted in lexicographic name order, which is the
    canonical registry order shared with stacked sharded builds; m is sized
    from the exact average distinct-term count unless given."""
    params.validate()
    pairs = _materialize(corpus)
    idx = RamboIndex(_sized_params(pairs, params, target_p))
    for name, terms in pairs:
        idx.insert_set(name, terms)
    return idx


def build_shard_pieces(params: RamboParams, corpus, target_p: float = 0.01) -> list:
    """Independent per-shard builds of one corpus; stacking them reproduces
    the full build byte for byte. All pieces share the globally sized m."""
    params.validate()
    if params.is_shard_piece:
        raise InvalidParameterError("pass full-grid params, not a shard piece's")
    pairs = _materialize(corpus)
    sized = _sized_params(pairs, params, target_p)
    router = derive_hasher(params.master_seed, "shard_router", 0, params.shards)
    groups = [[] for _ in range(params.shards)]
    for name, terms in pairs:
        groups[router.hash(key_digest(name))].append((name, terms))
    pieces = []
    for ordinal, group in enumerate(groups):
        piece = RamboIndex(replace(sized, B=sized.local_b, shard_ordinal=ordinal))
        for name, terms in group:
            piece.insert_set(name, terms)
        pieces.append(piece)
    return pieces


def build_sharded(params: RamboParams, corpus, target_p: float = 0.01) -> RamboIndex:
    """Simulated two-level build: route each set to a shard, build the s
    sub-grids independently, stack. shards == 1 degenerates to the
    monolithic build."""
    params.validate()
    if params.shards == 1:
        return build_index(corpus, params, target_p)
    return stack_indexes(build_shard_pieces(params, corpus, target_p))


def stack_indexes(pieces) -> RamboIndex:
    """Assemble shard pieces into the full B = shards * local_b grid.

    Piece ordinal i fills buckets [i * local_b, (i+1) * local_b). The global
    registry is ordered lexicographically by name, which matches a
    monolithic build inserted in lexicographic order (the canonical order
    used by build_index and the corpus reader).
    """
    pieces = list(pieces)
    if not pieces:
        raise IncompatibleShardError("no shard pieces to stack")
    if len(pieces) == 1 and pieces[0].params.shards == 1:
        return pieces[0]
    ref = pieces[0].params
    if len(pieces) != ref.shards:
        raise IncompatibleShardError(f"need {ref.shards} pieces, got {len(pieces)}")
    want = replace(ref, shard_ordinal=0)
    seen = set()
    for piece in pieces:
        q = piece.params
        if not q.is_shard_piece:
            raise IncompatibleShardError("can only stack unstacked shard pieces")
        if replace(q, shard_ordinal=0) != want:
            raise IncompatibleShardError(
                f"shard parameter mismatch: {replace(q, shard_ordinal=0)} vs {want}"
            )
        seen.add(q.shard_ordinal)
    if seen != set(range(ref.shards)):
        raise IncompatibleShardError(f"shard ordinals {sorted(seen)} are not exactly 0..{ref.shards - 1}")
    pieces.sort(key=lambda piece: piece.params.shard_ordinal)

    names = []
    for piece in pieces:
        for name in piece.registry:
            if piece._router.hash(key_digest(name)) != piece.params.shard_ordinal:
                raise IncompatibleShardError(
                    f"set {name!r} does not route to shard {piece.params.shard_ordinal}"
                )
        names.extend(piece.registry)
    if len(set(names)) != len(names):
        raise IncompatibleShardError("same set name appears in multiple shards")
    names.sort()
    global_id = {name: i for i, name in enumerate(names)}

    out = RamboIndex(replace(ref, B=ref.shards * ref.local_b, shard_ordinal=0))
    out.registry = SetRegistry(names)
    lb = ref.local_b
    for i, piece in enumerate(pieces):
        out.grid_bits[:, i * lb : (i + 1) * lb, :] = piece.grid_bits
        out.insert_counts[:, i * lb : (i + 1) * lb] = piece.insert_counts
        remap = [global_id[name] for name in piece.registry.names]
        for r in range(ref.R):
            for b in range(lb):
                out.members[r][i * lb + b] = sorted(remap[sid] for sid in piece.members[r][b])
    return out
