"""Corpus readers: one file per set, tokenized as sliding windows or words.

Sequence files are one long string (newlines stripped) cut into length-k
windows at stride 1; document files are free text lowered and split into
alphanumeric runs. Token streams are lazy; only the raw file bytes are
held at once.
"""

import logging
import os
import re
from dataclasses import dataclass

from .errors import CorpusError, InvalidParameterError

log = logging.getLogger(__name__)

_WORD_RUN = re.compile(rb"[a-z0-9]+")


@dataclass
class CorpusSpec:
    """Where a corpus lives and how to cut it into terms."""

    root: str
    kind: str = "document"  # "sequence" or "document"
    k: int = 31  # window length, sequence kind only
    stoplist: str = ""  # path to newline-separated stopwords, document kind


def kgram_tokens(seq, k: int):
    """Length-k windows of seq at stride 1; empty if seq is shorter than k."""
    if k < 1:
        raise InvalidParameterError(f"window length must be >= 1, got {k}")
    if isinstance(seq, str):
        seq = seq.encode("utf-8")
    return (seq[i : i + k] for i in range(len(seq) - k + 1))


def word_tokens(text, stoplist=frozenset()):
    """Lowercased maximal [a-z0-9] runs of text, stopwords dropped,
    duplicates preserved."""
    if isinstance(text, str):
        text = text.encode("utf-8")
    return (m.group(0) for m in _WORD_RUN.finditer(text.lower()) if m.group(0) not in stoplist)


def load_stoplist(path) -> frozenset:
    with open(path, "rb") as fh:
        return frozenset(line.strip().lower() for line in fh if line.strip())


def _validated(spec: CorpusSpec) -> frozenset:
    if spec.kind not in ("sequence", "document"):
        raise InvalidParameterError(f"corpus kind must be sequence or document, got {spec.kind!r}")
    if spec.kind == "sequence" and spec.k < 1:
        raise InvalidParameterError(f"sequence corpus needs window length >= 1, got {spec.k}")
    return load_stoplist(spec.stoplist) if spec.stoplist else frozenset()


def read_corpus(spec: CorpusSpec, on_error=None):
    """Yield (set name, lazy term stream) per file under spec.root, in
    lexicographic name order.

    A file that cannot be read is reported (on_error(name, exc) if given,
    else a log warning) and skipped; a missing root is fatal. Sequence
    files shorter than k yield an empty stream with a warning, so dirty
    data cannot abort a bulk build.
    """
    stoplist = _validated(spec)
    try:
        entries = sorted(e.name for e in os.scandir(spec.root) if e.is_file())
    except OSError as exc:
        raise CorpusError(f"cannot read corpus root {spec.root!r}: {exc}") from exc
    for name in entries:
        try:
            with open(os.path.join(spec.root, name), "rb") as fh:
                data = fh.read()
        except OSError as exc:
            if on_error is not None:
                on_error(name, exc)
            else:
                log.warning("skipping unreadable corpus file %s: %s", name, exc)
            continue
        if spec.kind == "sequence":
            data = data.replace(b"\n", b"").replace(b"\r", b"")
            if len(data) < spec.k:
                log.warning("sequence file %s is shorter than one window (%d < %d)",
                            name, len(data), spec.k)
            yield name, kgram_tokens(data, spec.k)
        else:
            yield name, word_tokens(data, stoplist)


def sample_avg_cardinality(spec: CorpusSpec, sample_files: int) -> float:
    """Mean distinct-term count over the first sample_files files; the
    cheap estimate that sizes cell filters before a full pass."""
    if sample_files < 1:
        raise InvalidParameterError(f"sample size must be >= 1, got {sample_files}")
    counts = []
    for _, terms in read_corpus(spec):
        counts.append(len(set(terms)))
        if len(counts) >= sample_files:
            break
    if not counts:
        raise CorpusError(f"corpus root {spec.root!r} has no readable files to sample")
    return sum(counts) / len(counts)
