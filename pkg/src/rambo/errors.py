"""Exception hierarchy shared by all rambo modules."""


class RamboError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(RamboError, ValueError):
    """A structural parameter (B, R, eta, m, p, ...) is out of range."""


class InvalidQueryError(RamboError, ValueError):
    """A query is empty or shorter than the window length."""


class IncompatibleFilterError(RamboError):
    """Two filters cannot be merged (different m, eta or hash seeds)."""


class CannotFoldError(RamboError):
    """The grid cannot be halved (odd bucket or shard count)."""


class IncompatibleShardError(RamboError):
    """Shard pieces disagree on parameters, seeds or ordinals."""


class CorruptIndexError(RamboError):
    """An index file failed magic, version, CRC or length checks."""


class InconsistentIndexError(RamboError):
    """A loaded index violates the per-table partition invariant."""


class CorpusError(RamboError):
    """The corpus root is missing, empty or unreadable."""
