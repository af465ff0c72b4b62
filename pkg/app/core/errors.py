"""Domain exceptions.

Each one subclasses a builtin so callers can catch either the specific
error or the generic ValueError / RuntimeError.
"""


class CorpusFormatError(ValueError):
    """A corpus line could not be parsed."""

    def __init__(self, message: str, line_number: int) -> None:
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class DuplicatePaperError(ValueError):
    """The same paper id appears twice in a corpus file."""

    def __init__(self, paper_id: str, line_number: int) -> None:
        super().__init__(f"line {line_number}: duplicate paper_id {paper_id!r}")
        self.paper_id = paper_id
        self.line_number = line_number


class CacheVersionError(RuntimeError):
    """A cache file was written by another format version or for other inputs."""


class CohortTooSmallError(ValueError):
    """A cohort is too small to split into percentile groups."""

    def __init__(self, size: int, minimum: int) -> None:
        super().__init__(f"cohort has {size} papers, at least {minimum} required")
        self.size = size
        self.minimum = minimum


class OracleCapExceededError(ValueError):
    """The brute-force oracle was handed a corpus above its size cap."""


class InfeasibleConfigError(ValueError):
    """A generator configuration cannot produce the requested corpus."""
