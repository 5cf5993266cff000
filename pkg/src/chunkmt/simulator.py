"""Streaming chunk-by-chunk decoding with pluggable policies and translators.

One simulation session reads source tokens one at a time, asks the policy
after every read whether the current chunk ends, and on a boundary (or at
the end of the stream) hands the accumulated chunk to the translator with
the full source history available. All target tokens of a chunk are flushed
into the trace at once. The resulting event log is the contract: latency
metrics derive g(i), the number of reads before each write, from it.

Translators may return several chunks from the stream-final call; this is
how gold chunk sequences whose last chunks add no source words replay.
"""

from __future__ import annotations

import os
import selectors
import shlex
import subprocess
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, TextIO

from .errors import FileFormatError, MissingInputError, RecordError, TranslatorError
from .records import BoundaryLabels, ChunkedRecord

READ = "READ"
WRITE = "WRITE"
CHUNK_END = "CHUNK_END"
ERROR = "ERROR"


@dataclass(frozen=True)
class TraceEvent:
    kind: str
    position: int = 0
    token: str | None = None


@dataclass
class SimulationTrace:
    """Ordered READ/WRITE/CHUNK_END log of one simulated sentence."""

    events: tuple[TraceEvent, ...]
    record_id: int = 0
    set_id: str | None = None
    delay: int | None = None
    error: str | None = None

    @property
    def read_count(self) -> int:
        return sum(1 for e in self.events if e.kind == READ)

    @property
    def write_count(self) -> int:
        return sum(1 for e in self.events if e.kind == WRITE)

    def g(self) -> tuple[int, ...]:
        """Number of source reads preceding each target write."""
        reads, out = 0, []
        for event in self.events:
            if event.kind == READ:
                reads += 1
            elif event.kind == WRITE:
                out.append(reads)
        return tuple(out)

    def target_tokens(self) -> tuple[str, ...]:
        return tuple(e.token for e in self.events if e.kind == WRITE and e.token is not None)


class ThresholdPolicy:
    """Chunk ends where the supplied boundary probability exceeds the threshold."""

    def __init__(self, probabilities: Sequence[float], threshold: float = 0.5):
        if not 0.0 < threshold < 1.0:
            raise FileFormatError(f"boundary threshold must lie in (0, 1), got {threshold}")
        self.probabilities = tuple(float(p) for p in probabilities)
        self.threshold = threshold

    def should_flush(self, position: int) -> bool:
        if position > len(self.probabilities):
            raise FileFormatError(
                f"no boundary probability for source position {position} "
                f"(only {len(self.probabilities)} given)"
            )
        return self.probabilities[position - 1] > self.threshold


def oracle_policy(
    source: ChunkedRecord | BoundaryLabels, threshold: float = 0.5
) -> ThresholdPolicy:
    """Replay gold chunk ends as hard 0/1 boundary probabilities."""
    if isinstance(source, ChunkedRecord):
        ends = {s for s, _ in source.chunks.boundaries}
        flags = [1.0 if j in ends else 0.0 for j in range(1, len(source.pair.source) + 1)]
    else:
        flags = [float(b) for b in source.source_flags]
    return ThresholdPolicy(flags, threshold)


class WaitkPolicy:
    """Read k words, then alternate s reads with each flush."""

    def __init__(self, k: int, s: int = 1):
        if k < 1 or s < 1:
            raise FileFormatError(f"wait-k policy requires k, s >= 1, got k={k} s={s}")
        self.k = k
        self.s = s

    def should_flush(self, position: int) -> bool:
        return position >= self.k and (position - self.k) % self.s == 0


class ReferenceReplayTranslator:
    """Emit the gold target chunks of a record, one per boundary.

    The stream-final call returns every chunk still pending, which realizes
    gold sequences whose trailing chunks consume no source words.
    """

    def __init__(self, record: ChunkedRecord):
        self._chunks = [list(chunk) for chunk in record.target_chunks()]
        self._next = 0

    def translate(
        self, history: Sequence[str], start: int, end: int, final: bool
    ) -> list[list[str]]:
        if final:
            remaining = self._chunks[self._next :]
            self._next = len(self._chunks)
            return remaining
        if self._next >= len(self._chunks):
            return []
        chunk = self._chunks[self._next]
        self._next += 1
        return [chunk]


class DictionaryTranslator:
    """Token-for-token lookup over the chunk span; unknown tokens pass through."""

    def __init__(self, mapping: dict[str, str]):
        self.mapping = dict(mapping)

    def translate(
        self, history: Sequence[str], start: int, end: int, final: bool
    ) -> list[list[str]]:
        chunk = history[start - 1 : end]
        return [[self.mapping.get(token, token) for token in chunk]]


class ExternalTranslator:
    """Line-protocol bridge to a translator subprocess.

    Request, one line per chunk:   "<start> <end> ||| <source history so far>"
    Response, one line:            "<target tokens ...> <eoc>"
    start == 1 marks the beginning of a new sentence. A missing end-of-chunk
    marker, closed pipe, or timeout raises TranslatorError.
    """

    END_MARKER = "<eoc>"

    def __init__(self, command: str | Sequence[str], timeout: float = 30.0):
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = timeout
        self._proc: subprocess.Popen | None = None
        self._buffer = bytearray()

    def _ensure_proc(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            try:
                self._proc = subprocess.Popen(
                    self.command, stdin=subprocess.PIPE, stdout=subprocess.PIPE
                )
            except OSError as exc:
                raise TranslatorError(f"cannot start translator {self.command}: {exc}") from exc
            self._buffer = bytearray()
        return self._proc

    def _read_line(self, proc: subprocess.Popen) -> str:
        assert proc.stdout is not None
        fd = proc.stdout.fileno()
        sel = selectors.DefaultSelector()
        sel.register(fd, selectors.EVENT_READ)
        try:
            while b"\n" not in self._buffer:
                if not sel.select(self.timeout):
                    raise TranslatorError(
                        f"translator did not answer within {self.timeout} s"
                    )
                data = os.read(fd, 65536)
                if not data:
                    raise TranslatorError("translator closed its output stream")
                self._buffer.extend(data)
        finally:
            sel.close()
        line, _, rest = bytes(self._buffer).partition(b"\n")
        self._buffer = bytearray(rest)
        return line.decode("utf-8")

    def translate(
        self, history: Sequence[str], start: int, end: int, final: bool
    ) -> list[list[str]]:
        proc = self._ensure_proc()
        assert proc.stdin is not None
        request = f"{start} {end} ||| {' '.join(history)}\n".encode("utf-8")
        try:
            proc.stdin.write(request)
            proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise TranslatorError(f"translator pipe broke: {exc}") from exc
        tokens = self._read_line(proc).split()
        if not tokens or tokens[-1] != self.END_MARKER:
            raise TranslatorError(
                f"translator response lacks the {self.END_MARKER} marker: {tokens!r}"
            )
        return [tokens[:-1]]

    def close(self) -> None:
        if self._proc is not None:
            for stream in (self._proc.stdin, self._proc.stdout):
                if stream is not None:
                    stream.close()
            self._proc.terminate()
            self._proc.wait(timeout=5)
            self._proc = None

    def __enter__(self) -> "ExternalTranslator":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def simulate(
    source: Sequence[str],
    policy,
    translator,
    *,
    record_id: int = 0,
    set_id: str | None = None,
    delay: int | None = None,
) -> SimulationTrace:
    """Run one read/write session and return its trace.

    The stream-final flush fires at the last source token whether or not the
    policy calls a boundary there. Translator failures truncate the trace
    with an ERROR event instead of raising; missing policy probabilities are
    hard errors.
    """
    tokens = list(source)
    if not tokens:
        raise RecordError("cannot simulate an empty source stream", record_id)
    events: list[TraceEvent] = []
    error: str | None = None
    written = 0
    chunk_index = 0
    pending_start = 1
    for j, token in enumerate(tokens, start=1):
        events.append(TraceEvent(READ, j, token))
        final = j == len(tokens)
        if not (policy.should_flush(j) or final):
            continue
        try:
            chunks = translator.translate(tokens[:j], pending_start, j, final)
        except TranslatorError as exc:
            error = str(exc)
            events.append(TraceEvent(ERROR, j, None))
            break
        pending_start = j + 1
        for chunk in chunks:
            for out_token in chunk:
                written += 1
                events.append(TraceEvent(WRITE, written, out_token))
            chunk_index += 1
            events.append(TraceEvent(CHUNK_END, chunk_index))
    return SimulationTrace(
        tuple(events), record_id=record_id, set_id=set_id, delay=delay, error=error
    )


def replay_labels(record: ChunkedRecord, *, set_id: str | None = None) -> SimulationTrace:
    """Deterministic trace implied by a gold chunk sequence.

    Reads through each chunk's source end, then writes its target words;
    any source tail beyond the final chunk is read after the last flush.
    Equal to simulate() under the oracle policy with reference replay.
    """
    events: list[TraceEvent] = []
    reads = 0
    prev_t = 0
    for k, (s_end, t_end) in enumerate(record.chunks.boundaries, start=1):
        while reads < s_end:
            reads += 1
            events.append(TraceEvent(READ, reads, record.pair.source[reads - 1]))
        for i in range(prev_t + 1, t_end + 1):
            events.append(TraceEvent(WRITE, i, record.pair.target[i - 1]))
        events.append(TraceEvent(CHUNK_END, k))
        prev_t = t_end
    while reads < len(record.pair.source):
        reads += 1
        events.append(TraceEvent(READ, reads, record.pair.source[reads - 1]))
    return SimulationTrace(
        tuple(events), record_id=record.id, set_id=set_id, delay=record.delay
    )


def _format_trace(trace: SimulationTrace) -> Iterator[str]:
    header = f"SENT\t{trace.record_id}"
    if trace.set_id is not None:
        header += f"\tset={trace.set_id}"
    if trace.delay is not None:
        header += f"\tdelay={trace.delay}"
    yield header
    for event in trace.events:
        if event.kind in (READ, WRITE):
            yield f"{event.kind}\t{event.position}\t{event.token}"
        elif event.kind == CHUNK_END:
            yield f"{CHUNK_END}\t{event.position}"
        else:
            yield f"{ERROR}\t{trace.error or ''}"


def write_traces(traces: Iterable[SimulationTrace], path_or_file: str | TextIO) -> None:
    """Write traces in the line-per-event text form, blank line between sentences."""
    owned = isinstance(path_or_file, str)
    f = open(path_or_file, "w", encoding="utf-8") if owned else path_or_file
    try:
        first = True
        for trace in traces:
            if not first:
                f.write("\n")
            first = False
            for line in _format_trace(trace):
                f.write(line + "\n")
    finally:
        if owned:
            f.close()


def read_traces(path: str) -> Iterator[SimulationTrace]:
    try:
        f = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise MissingInputError(f"cannot open {path}: {exc}") from exc
    with f:
        header: str | None = None
        events: list[TraceEvent] = []
        error: str | None = None

        def build() -> SimulationTrace:
            assert header is not None
            fields = header.split("\t")
            set_id = None
            delay = None
            for extra in fields[2:]:
                key, _, value = extra.partition("=")
                if key == "set":
                    set_id = value
                elif key == "delay":
                    delay = int(value)
            return SimulationTrace(
                tuple(events),
                record_id=int(fields[1]),
                set_id=set_id,
                delay=delay,
                error=error,
            )

        for lineno, raw in enumerate(f, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            kind = fields[0]
            if kind == "SENT":
                if header is not None:
                    yield build()
                header, events, error = line, [], None
            elif header is None:
                raise FileFormatError(f"{path}:{lineno}: event before any SENT header")
            elif kind in (READ, WRITE):
                events.append(TraceEvent(kind, int(fields[1]), fields[2]))
            elif kind == CHUNK_END:
                events.append(TraceEvent(CHUNK_END, int(fields[1])))
            elif kind == ERROR:
                error = fields[1] if len(fields) > 1 else ""
                events.append(TraceEvent(ERROR))
            else:
                raise FileFormatError(f"{path}:{lineno}: unknown event kind {kind!r}")
        if header is not None:
            yield build()
