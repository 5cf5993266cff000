"""Exception hierarchy and skip accounting. The CLI maps exceptions to exit codes."""

from __future__ import annotations

from collections import Counter


class ChunkmtError(Exception):
    """Base class for errors raised by this package."""

    exit_code = 1


class MissingInputError(ChunkmtError):
    """An input path does not exist or cannot be opened."""

    exit_code = 3


class FileFormatError(ChunkmtError):
    """A file violates its format contract in a way that affects the whole run."""

    exit_code = 4


class RecordError(ChunkmtError):
    """A single record is invalid; batch pipelines may skip and count it."""

    exit_code = 4

    def __init__(self, message: str, record_id: int | None = None):
        super().__init__(message if record_id is None else f"record {record_id}: {message}")
        self.record_id = record_id


class SerializationError(ChunkmtError):
    """A record cannot be represented in the requested output format."""

    exit_code = 4


class TranslatorError(ChunkmtError):
    """An external or plugged-in translator failed mid-session."""

    exit_code = 1


class SkipLog:
    """Counts records skipped because of record-level errors.

    Large corpora must survive isolated bad lines, so readers and pipelines
    skip them and report a summary instead of aborting.
    """

    def __init__(self) -> None:
        self.total = 0
        self.by_reason: Counter[str] = Counter()

    def skip(self, reason: str, record_id: int | None = None) -> None:
        self.total += 1
        self.by_reason[reason] += 1

    def summary(self) -> str | None:
        if self.total == 0:
            return None
        parts = ", ".join(f"{reason}: {n}" for reason, n in sorted(self.by_reason.items()))
        return f"skipped {self.total} record(s) ({parts})"
