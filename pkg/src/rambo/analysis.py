"""Closed-form cost and error models for the grid, with oracles.

Notation used throughout: K sets, B buckets per table, R tables, eta
hashes per cell filter, p the per-cell filter false-positive rate, V the
number of sets actually containing a query term, delta a target overall
failure probability.

Two per-insertion storage discount factors are shipped on purpose:
gamma_series evaluates a published series form verbatim, while
gamma_balls_in_bins is the closed form of E[1/occupancy] under the
balls-in-bins model that the series is meant to approximate. They
disagree numerically (0.9056 vs 0.95 at B=10, V=2); the Monte-Carlo
oracle sides with gamma_balls_in_bins, so expected_memory uses that and
reports both. All functions are pure; the Monte-Carlo helper takes an
explicit seed.
"""

import math

import numpy as np

from .errors import InvalidParameterError
from .hashing import key_digest


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise InvalidParameterError(msg)


def per_set_fp_rate(p: float, B: int, V: int, R: int) -> float:
    """Probability a single non-containing set survives all R tables:
    (p(1-1/B)^V + 1 - (1-1/B)^V)^R."""
    _check(0.0 <= p <= 1.0, f"p must be in [0, 1], got {p}")
    _check(B >= 2, f"B must be >= 2, got {B}")
    _check(V >= 0, f"V must be >= 0, got {V}")
    _check(R >= 1, f"R must be >= 1, got {R}")
    miss = (1.0 - 1.0 / B) ** V
    return (p * miss + 1.0 - miss) ** R


def overall_failure_bound(K: int, p: float, B: int, V: int, R: int, clamp: bool = True) -> float:
    """Union bound on any of the K sets being misreported:
    K(1 - (1-p)(1-1/B)^V)^R. Algebraically K times per_set_fp_rate; clamped
    to 1 for reporting unless clamp=False."""
    _check(K >= 1, f"K must be >= 1, got {K}")
    _check(0.0 <= p <= 1.0, f"p must be in [0, 1], got {p}")
    _check(B >= 2, f"B must be >= 2, got {B}")
    _check(V >= 0, f"V must be >= 0, got {V}")
    _check(R >= 1, f"R must be >= 1, got {R}")
    raw = K * (1.0 - (1.0 - p) * (1.0 - 1.0 / B) ** V) ** R
    return min(1.0, raw) if clamp else raw


def min_repetitions(K: int, delta: float) -> int:
    """Tables sufficient for overall failure delta: max(1, ceil(ln K - ln delta)).

    Natural logs; the derivation assumes the per-table survival factor is
    at most 1/e, which holds whenever p <= 1/B and B >= 6.
    """
    _check(K >= 1, f"K must be >= 1, got {K}")
    _check(0.0 < delta <= 1.0, f"delta must be in (0, 1], got {delta}")
    return max(1, math.ceil(math.log(K) - math.log(delta)))


def expected_query_cost(K: int, B: int, R: int, V: int, p: float, eta: int) -> float:
    """Expected work for one term query: B*R*eta bit probes plus
    (K/B)(V + Bp)R candidate-list elements."""
    _check(K >= 1, f"K must be >= 1, got {K}")
    _check(B >= 2, f"B must be >= 2, got {B}")
    _check(R >= 1, f"R must be >= 1, got {R}")
    _check(V >= 0, f"V must be >= 0, got {V}")
    _check(0.0 <= p <= 1.0, f"p must be in [0, 1], got {p}")
    _check(eta >= 1, f"eta must be >= 1, got {eta}")
    return B * R * eta + (K / B) * (V + B * p) * R


def optimal_buckets(K: int, V: int, eta: int) -> float:
    """Bucket count minimizing expected_query_cost in the continuous
    relaxation: sqrt(KV/eta). Rounding to an admissible integer (a power of
    two if folding matters) is the caller's job."""
    _check(K >= 1, f"K must be >= 1, got {K}")
    _check(V >= 1, f"V must be >= 1, got {V}")
    _check(eta >= 1, f"eta must be >= 1, got {eta}")
    return math.sqrt(K * V / eta)


def gamma_series(B: int, V: int) -> float:
    """Series form of the storage discount, evaluated verbatim:
    sum_{v=1..V} (1/v)(B-1)^(V-2v+1) / B^(V-1), negative exponents as
    reciprocals. Disagrees with the balls-in-bins closed form for V > 1;
    kept for comparison, not used for sizing."""
    _check(B >= 2, f"B must be >= 2, got {B}")
    _check(V >= 1, f"V must be >= 1, got {V}")
    scale = float(B) ** (V - 1)
    return sum((B - 1.0) ** (V - 2 * v + 1) / (v * scale) for v in range(1, V + 1))


def gamma_balls_in_bins(B: int, V: int) -> float:
    """Exact expected per-insertion storage factor under uniform placement:
    B(1 - (1-1/B)^V)/V, the closed form of E[1/occupancy] when a term's V
    copies land uniformly in B buckets. In (1/V, 1], and 1 only at V=1."""
    _check(B >= 2, f"B must be >= 2, got {B}")
    _check(V >= 1, f"V must be >= 1, got {V}")
    return B * (1.0 - (1.0 - 1.0 / B) ** V) / V


def gamma_monte_carlo(B: int, V: int, trials: int, seed: int = 0) -> tuple:
    """Simulated storage factor: throw the V-1 sibling copies of a tagged
    term into B buckets and average 1/occupancy of the tagged bucket.
    Returns (estimate, standard error)."""
    _check(B >= 2, f"B must be >= 2, got {B}")
    _check(V >= 1, f"V must be >= 1, got {V}")
    _check(trials >= 1, f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(seed)
    total = total_sq = 0.0
    done = 0
    rows = max(1, (1 << 22) // max(V - 1, 1))
    while done < trials:
        n = min(rows, trials - done)
        siblings = rng.integers(0, B, size=(n, V - 1))
        occupancy = 1 + (siblings == 0).sum(axis=1)
        vals = 1.0 / occupancy
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        done += n
    mean = total / trials
    var = max(0.0, total_sq / trials - mean * mean)
    return mean, math.sqrt(var / trials)


def expected_memory(B: int, V: int, K: int, p: float, total_insertions: int) -> dict:
    """Bits the grid should need for total_insertions (term, set) pairs:
    gamma * ln K * log2(1/p) * insertions, with the balls-in-bins gamma.
    The series gamma is reported alongside for comparison."""
    _check(K >= 1, f"K must be >= 1, got {K}")
    _check(0.0 < p < 1.0, f"p must be in (0, 1), got {p}")
    _check(total_insertions >= 0, f"insertions must be >= 0, got {total_insertions}")
    g_star = gamma_balls_in_bins(B, V)
    bits = g_star * math.log(K) * math.log2(1.0 / p) * total_insertions
    return {
        "expected_bits": bits,
        "gamma_balls_in_bins": g_star,
        "gamma_series": gamma_series(B, V),
    }


class InvertedIndexOracle:
    """Exact term -> set-ID postings, keyed by term digest so collisions
    are judged the same way the grid sees them. Ground truth for
    false-positive measurement and miss checks."""

    __slots__ = ("postings", "names")

    def __init__(self):
        self.postings = {}
        self.names = []

    def add_set(self, name: str, terms) -> int:
        sid = len(self.names)
        self.names.append(name)
        for term in terms:
            self.postings.setdefault(key_digest(term), set()).add(sid)
        return sid

    def query_digest(self, digest: int) -> set:
        return self.postings.get(digest, set())

    def query(self, term) -> list:
        return sorted(self.query_digest(key_digest(term)))

    def __len__(self):
        return len(self.names)


def oracle_build(corpus) -> InvertedIndexOracle:
    """Exact index over a corpus, set IDs in lexicographic name order to
    match the canonical build order of the grid."""
    pairs = corpus.items() if hasattr(corpus, "items") else list(corpus)
    oracle = InvertedIndexOracle()
    for name, terms in sorted(pairs, key=lambda pair: pair[0]):
        oracle.add_set(name, terms)
    return oracle


def oracle_query(oracle: InvertedIndexOracle, term) -> list:
    return oracle.query(term)
