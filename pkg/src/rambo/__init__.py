"""Grid-of-Bloom-filters index for multiple set membership testing.

Build an index over K named sets, then ask which sets may contain a term,
a conjunction of terms, or every window of a sequence. Answers never miss
a truly containing set; false positives are controlled by the grid shape
(B buckets x R tables) and the per-cell filter rate.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .analysis import (
    InvertedIndexOracle,
    expected_memory,
    expected_query_cost,
    gamma_balls_in_bins,
    gamma_monte_carlo,
    gamma_series,
    min_repetitions,
    optimal_buckets,
    oracle_build,
    oracle_query,
    overall_failure_bound,
    per_set_fp_rate,
)
from .bench import MULTIPLICITY_MODEL, BenchConfig, planted_corpus, random_terms, run_fp_benchmark
from .bloom import (
    BloomFilterUnit,
    bfu_contains,
    bfu_fp_theoretical,
    bfu_insert,
    bfu_or_merge,
    bfu_size_for,
    classic_optimal_params,
    new_bfu,
)
from .core import (
    QueryResult,
    RamboIndex,
    RamboParams,
    SetRegistry,
    build_index,
    build_shard_pieces,
    build_sharded,
    new_index,
    shard_placement,
    stack_indexes,
)
from .errors import (
    CannotFoldError,
    CorpusError,
    CorruptIndexError,
    IncompatibleFilterError,
    IncompatibleShardError,
    InconsistentIndexError,
    InvalidParameterError,
    InvalidQueryError,
    RamboError,
)
from .hashing import MERSENNE_P, UniversalHasher, derive_hasher, key_digest, universal_hash
from .ingest import (
    CorpusSpec,
    kgram_tokens,
    load_stoplist,
    read_corpus,
    sample_avg_cardinality,
    word_tokens,
)
from .storage import index_from_bytes, index_to_bytes, load_index, save_index, stack_shards

__version__ = "0.1.0"

__all__ = [
    "BenchConfig",
    "BloomFilterUnit",
    "CannotFoldError",
    "CorpusError",
    "CorpusSpec",
    "CorruptIndexError",
    "IncompatibleFilterError",
    "IncompatibleShardError",
    "InconsistentIndexError",
    "InvalidParameterError",
    "InvalidQueryError",
    "InvertedIndexOracle",
    "KERNEL_BACKEND",
    "MERSENNE_P",
    "MULTIPLICITY_MODEL",
    "QueryResult",
    "RamboError",
    "RamboIndex",
    "RamboParams",
    "SetRegistry",
    "UniversalHasher",
    "bfu_contains",
    "bfu_fp_theoretical",
    "bfu_insert",
    "bfu_or_merge",
    "bfu_size_for",
    "build_index",
    "build_shard_pieces",
    "build_sharded",
    "classic_optimal_params",
    "derive_hasher",
    "expected_memory",
    "expected_query_cost",
    "gamma_balls_in_bins",
    "gamma_monte_carlo",
    "gamma_series",
    "index_from_bytes",
    "index_to_bytes",
    "key_digest",
    "kgram_tokens",
    "load_index",
    "load_stoplist",
    "min_repetitions",
    "new_bfu",
    "new_index",
    "optimal_buckets",
    "oracle_build",
    "oracle_query",
    "overall_failure_bound",
    "per_set_fp_rate",
    "planted_corpus",
    "random_terms",
    "read_corpus",
    "run_fp_benchmark",
    "sample_avg_cardinality",
    "save_index",
    "shard_placement",
    "stack_indexes",
    "stack_shards",
    "universal_hash",
    "word_tokens",
]
