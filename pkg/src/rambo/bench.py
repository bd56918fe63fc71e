"""Synthetic false-positive benchmark.

Plants random fixed-length terms, each into V random sets with V drawn as
min(K, 1 + floor(Exponential(mean alpha))), builds a grid over exactly
that corpus, then measures per-set false positives for the planted terms
(against their non-containing sets) and for an equal number of absent
terms, with an exact inverted index as ground truth. Miss count must be
zero structurally; everything else is compared against the closed-form
models at the realized per-cell rate.
"""

import time
from dataclasses import dataclass

import numpy as np

from .analysis import (
    expected_query_cost,
    oracle_build,
    overall_failure_bound,
    per_set_fp_rate,
)
from .core import RamboParams, build_index
from .errors import InvalidParameterError
from .hashing import key_digest

MULTIPLICITY_MODEL = "V = min(K, 1 + floor(Exponential(mean=alpha)))"


@dataclass
class BenchConfig:
    num_queries: int = 1000
    term_length: int = 30
    multiplicity_mean: float = 100.0  # alpha, the exponential's mean
    seed: int = 0
    K_cap: int = 100  # number of sets

    def validate(self) -> None:
        if self.num_queries < 1:
            raise InvalidParameterError(f"num_queries must be >= 1, got {self.num_queries}")
        if self.term_length < 1:
            raise InvalidParameterError(f"term_length must be >= 1, got {self.term_length}")
        if self.multiplicity_mean <= 0:
            raise InvalidParameterError(f"multiplicity mean must be > 0, got {self.multiplicity_mean}")
        if self.K_cap < 1:
            raise InvalidParameterError(f"set count must be >= 1, got {self.K_cap}")


def random_terms(rng, count: int, length: int, exclude=()) -> list:
    """Distinct random byte terms whose digests avoid the excluded digests."""
    taken = set(exclude)
    out = []
    while len(out) < count:
        block = rng.integers(0, 256, size=(count - len(out), length), dtype=np.uint8)
        for row in block:
            term = row.tobytes()
            digest = key_digest(term)
            if digest not in taken:
                taken.add(digest)
                out.append(term)
    return out


def planted_corpus(rng, num_sets: int, num_terms: int, term_length: int = 30,
                   multiplicity_mean: float = 0.0, multiplicity: int = 0):
    """Corpus of num_sets sets holding num_terms planted terms.

    Per-term multiplicity is the fixed value when given, else the
    discretized exponential with the given mean. Returns (corpus dict,
    list of (term, owner ID set)) with IDs equal to the lexicographic
    registry order the build will assign.
    """
    names = [f"set{i:06d}" for i in range(num_sets)]
    corpus = {name: [] for name in names}
    terms = random_terms(rng, num_terms, term_length)
    if multiplicity:
        mult = np.full(num_terms, min(multiplicity, num_sets), dtype=np.int64)
    else:
        mult = 1 + np.floor(rng.exponential(multiplicity_mean, size=num_terms)).astype(np.int64)
        mult = np.minimum(mult, num_sets)
    planted = []
    for term, v in zip(terms, mult):
        owners = rng.choice(num_sets, size=int(v), replace=False)
        for sid in owners:
            corpus[names[sid]].append(term)
        planted.append((term, set(int(s) for s in owners)))
    return corpus, planted


def run_fp_benchmark(params: RamboParams, config: BenchConfig, target_p: float = 0.01) -> dict:
    config.validate()
    params.validate()
    rng = np.random.default_rng(config.seed)
    K = config.K_cap
    corpus, planted = planted_corpus(
        rng, K, config.num_queries, config.term_length,
        multiplicity_mean=config.multiplicity_mean,
    )

    t0 = time.perf_counter()
    idx = build_index(corpus, params, target_p)
    build_seconds = time.perf_counter() - t0
    oracle = oracle_build(corpus)

    false_negatives = 0
    fp_planted = denom_planted = 0
    probes = work_planted = 0
    t0 = time.perf_counter()
    for term, owners in planted:
        res = idx.query_term(term)
        got = set(res.set_ids)
        false_negatives += len(owners - got)
        fp_planted += len(got - owners)
        denom_planted += K - len(owners)
        probes += res.bfu_probes
        work_planted += res.intersect_work

    absent = random_terms(rng, config.num_queries, config.term_length,
                          exclude=oracle.postings.keys())
    fp_absent = work_absent = 0
    for term in absent:
        res = idx.query_term(term)
        fp_absent += len(res.set_ids)
        work_absent += res.intersect_work
    query_seconds = time.perf_counter() - t0

    n = config.num_queries
    fills = idx.fill_fractions()
    realized_p = float((fills ** params.eta).mean())
    mean_v = float(np.mean([len(owners) for _, owners in planted]))
    measured_cost = (probes + work_planted) / n
    p = idx.params
    return {
        "config": {
            "num_queries": n, "term_length": config.term_length,
            "multiplicity_mean": config.multiplicity_mean, "seed": config.seed,
            "sets": K, "multiplicity_model": MULTIPLICITY_MODEL,
        },
        "params": {
            "B": p.B, "R": p.R, "eta": p.eta, "m": p.m, "k": p.k,
            "shards": p.shards, "master_seed": p.master_seed, "target_p": target_p,
        },
        "false_negatives": false_negatives,
        "fp_rate_planted": fp_planted / max(1, denom_planted),
        "fp_rate_absent": fp_absent / (n * K),
        "mean_multiplicity": mean_v,
        "realized_bfu_p": realized_p,
        "predicted_fp_rate": per_set_fp_rate(realized_p, p.B, mean_v, p.R),
        "failure_bound": overall_failure_bound(K, realized_p, p.B, mean_v, p.R),
        "mean_bfu_probes": probes / n,
        "mean_intersect_work_planted": work_planted / n,
        "mean_intersect_work_absent": work_absent / n,
        "measured_query_cost": measured_cost,
        "expected_query_cost": expected_query_cost(K, p.B, p.R, mean_v, realized_p, p.eta),
        "grid_bits": p.B * p.R * p.m,
        "build_seconds": build_seconds,
        "query_seconds": query_seconds,
    }
