"""File formats: parallel text, Pharaoh alignments, chunked corpora, labels, subword maps.

Formats
-------
parallel text        one sentence per line, tokens separated by spaces
Pharaoh alignments   per line: space-separated "s-t" pairs; 0-based on disk
                     by convention, converted to the package's 1-based
                     positions on read (pass one_based=True for files that
                     already count from 1)
chunk text           two lines per record (source, then target), chunks
                     joined by a delimiter, default " | "
chunk records        one JSON object per line:
                     {"id":1,"source":[..],"target":[..],
                      "chunks":[[s,t],..],"delay":0}
boundary labels      one JSON object per line:
                     {"id":1,"source_flags":[..],"target_flags":[..],
                      "delay":0,"trailing_empty":0}
subword map          one line per sentence; words separated by spaces; the
                     subwords of one word joined by a joiner marker ("@@")

Readers take errors="raise" (default) or errors="skip"; with "skip", bad
records are counted in the given SkipLog and the stream continues. Problems
that invalidate the whole file always raise. The chunk text format cannot
carry the delay field; records read from it come back with delay 0.
"""

from __future__ import annotations

import json
from itertools import zip_longest
from typing import Iterable, Iterator, Sequence, TextIO

from .errors import FileFormatError, MissingInputError, RecordError, SerializationError, SkipLog
from .records import (
    AlignmentLinkSet,
    BoundaryLabels,
    ChunkedRecord,
    DelayedChunkSequence,
    SentencePair,
)

DEFAULT_DELIMITER = " | "
DEFAULT_JOINER = "@@"


def _open_read(path: str) -> TextIO:
    try:
        return open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise MissingInputError(f"cannot open {path}: {exc}") from exc


def _handle(exc: RecordError, errors: str, skiplog: SkipLog | None, reason: str) -> None:
    if errors == "skip":
        (skiplog or SkipLog()).skip(reason, exc.record_id)
    else:
        raise exc


def read_parallel(
    source_path: str,
    target_path: str,
    *,
    errors: str = "raise",
    skiplog: SkipLog | None = None,
) -> Iterator[SentencePair]:
    """Yield sentence pairs from two line-parallel token files.

    The record id is the 1-based line number. A length mismatch between the
    files aborts with the offending line number; an empty line on either side
    is a record-level error.
    """
    with _open_read(source_path) as fs, _open_read(target_path) as ft:
        for lineno, (src_line, tgt_line) in enumerate(zip_longest(fs, ft), start=1):
            if src_line is None or tgt_line is None:
                short = source_path if src_line is None else target_path
                raise FileFormatError(
                    f"parallel files differ in length: {short} ends before line {lineno}"
                )
            try:
                yield SentencePair(tuple(src_line.split()), tuple(tgt_line.split()), id=lineno)
            except RecordError as exc:
                _handle(exc, errors, skiplog, "empty or malformed sentence")


def read_sentences(path: str) -> Iterator[tuple[str, ...]]:
    """Yield token sequences from a plain one-sentence-per-line file."""
    with _open_read(path) as f:
        for line in f:
            yield tuple(line.split())


def parse_pharaoh_line(
    line: str,
    *,
    one_based: bool = False,
    source_len: int | None = None,
    target_len: int | None = None,
    record_id: int | None = None,
) -> AlignmentLinkSet:
    """Parse one "s-t s-t ..." line into a 1-based link set.

    Without explicit sentence lengths, both are inferred from the largest
    index seen on the line. Duplicate pairs collapse into one link.
    """
    offset = 0 if one_based else 1
    links = set()
    for token in line.split():
        left, sep, right = token.partition("-")
        if not sep or not left.lstrip("-").isdigit() or not right.lstrip("-").isdigit():
            raise RecordError(f"malformed alignment pair {token!r}", record_id)
        s, t = int(left) + offset, int(right) + offset
        if s < 1 or t < 1:
            raise RecordError(f"alignment pair {token!r} below position 1", record_id)
        links.add((s, t))
    src_len = source_len if source_len is not None else max((s for s, _ in links), default=0)
    tgt_len = target_len if target_len is not None else max((t for _, t in links), default=0)
    for s, t in links:
        if s > src_len or t > tgt_len:
            raise RecordError(
                f"link ({s},{t}) exceeds sentence of size {src_len}x{tgt_len}", record_id
            )
    return AlignmentLinkSet(frozenset(links), src_len, tgt_len)


def read_pharaoh(
    path: str,
    *,
    one_based: bool = False,
    lengths: Iterable[tuple[int, int]] | None = None,
    errors: str = "raise",
    skiplog: SkipLog | None = None,
) -> Iterator[AlignmentLinkSet | None]:
    """Yield link sets from a Pharaoh file, one per line.

    `lengths` optionally supplies (source_len, target_len) per line; links
    beyond those lengths are record-level errors. With errors="skip", bad
    lines yield None so line parity with sibling files survives.
    """
    length_iter = iter(lengths) if lengths is not None else None
    with _open_read(path) as f:
        for lineno, line in enumerate(f, start=1):
            src_len = tgt_len = None
            if length_iter is not None:
                try:
                    src_len, tgt_len = next(length_iter)
                except StopIteration:
                    raise FileFormatError(
                        f"{path}: no sentence lengths supplied for line {lineno}"
                    ) from None
            try:
                yield parse_pharaoh_line(
                    line,
                    one_based=one_based,
                    source_len=src_len,
                    target_len=tgt_len,
                    record_id=lineno,
                )
            except RecordError as exc:
                _handle(exc, errors, skiplog, "bad alignment line")
                yield None


def format_pharaoh_line(links: AlignmentLinkSet, *, one_based: bool = False) -> str:
    offset = 0 if one_based else 1
    return " ".join(f"{s - offset}-{t - offset}" for s, t in sorted(links.links))


def write_pharaoh(
    linksets: Iterable[AlignmentLinkSet | None], path: str, *, one_based: bool = False
) -> None:
    """Write link sets as Pharaoh lines; None entries become empty lines."""
    with open(path, "w", encoding="utf-8") as f:
        for links in linksets:
            f.write("" if links is None else format_pharaoh_line(links, one_based=one_based))
            f.write("\n")


def format_chunked_record(record: ChunkedRecord) -> str:
    return json.dumps(
        {
            "id": record.id,
            "source": list(record.pair.source),
            "target": list(record.pair.target),
            "chunks": [list(b) for b in record.chunks.boundaries],
            "delay": record.delay,
        },
        ensure_ascii=False,
        separators=(",", ":"),
    )


def parse_chunked_record(line: str, *, record_id: int | None = None) -> ChunkedRecord:
    try:
        obj = json.loads(line)
        pair = SentencePair(tuple(obj["source"]), tuple(obj["target"]), id=int(obj["id"]))
        chunks = DelayedChunkSequence(
            tuple((int(s), int(t)) for s, t in obj["chunks"]),
            source_len=len(pair.source),
            delay=int(obj.get("delay", 0)),
        )
        return ChunkedRecord(pair, chunks)
    except RecordError:
        raise
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise RecordError(f"bad chunk record: {exc}", record_id) from exc


def write_chunked(records: Iterable[ChunkedRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(format_chunked_record(record))
            f.write("\n")


def read_chunked(
    path: str, *, errors: str = "raise", skiplog: SkipLog | None = None
) -> Iterator[ChunkedRecord]:
    with _open_read(path) as f:
        for lineno, line in enumerate(f, start=1):
            try:
                yield parse_chunked_record(line, record_id=lineno)
            except RecordError as exc:
                _handle(exc, errors, skiplog, "bad chunk record")


def _render_segments(tokens: Sequence[str], ends: list[int], delimiter: str) -> str:
    segments, prev = [], 0
    for end in ends:
        segments.append(" ".join(tokens[prev:end]))
        prev = end
    line = delimiter.join(segments)
    if line.split(delimiter) != segments:
        raise SerializationError(
            f"chunk delimiter {delimiter!r} collides with token content in {segments!r}"
        )
    return line


def write_chunked_text(
    records: Iterable[ChunkedRecord], path: str, *, delimiter: str = DEFAULT_DELIMITER
) -> None:
    """Write the human-readable two-lines-per-record form.

    The delay field is not representable here and is dropped; empty source
    chunks at the sentence end come out as empty segments.
    """
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            src_ends = [s for s, _ in record.chunks.boundaries]
            tgt_ends = [t for _, t in record.chunks.boundaries]
            f.write(_render_segments(record.pair.source, src_ends, delimiter) + "\n")
            f.write(_render_segments(record.pair.target, tgt_ends, delimiter) + "\n")


def read_chunked_text(
    path: str,
    *,
    delimiter: str = DEFAULT_DELIMITER,
    errors: str = "raise",
    skiplog: SkipLog | None = None,
) -> Iterator[ChunkedRecord]:
    with _open_read(path) as f:
        lines = [line.rstrip("\n") for line in f]
    if len(lines) % 2 != 0:
        raise FileFormatError(f"{path}: chunk text files hold two lines per record")
    for rec_id, idx in enumerate(range(0, len(lines), 2), start=1):
        try:
            src_segments = lines[idx].split(delimiter)
            tgt_segments = lines[idx + 1].split(delimiter)
            if len(src_segments) != len(tgt_segments):
                raise RecordError(
                    f"{len(src_segments)} source chunks vs {len(tgt_segments)} target chunks",
                    rec_id,
                )
            source: list[str] = []
            target: list[str] = []
            boundaries = []
            for src_seg, tgt_seg in zip(src_segments, tgt_segments):
                source.extend(src_seg.split())
                target.extend(tgt_seg.split())
                boundaries.append((len(source), len(target)))
            pair = SentencePair(tuple(source), tuple(target), id=rec_id)
            chunks = DelayedChunkSequence(tuple(boundaries), source_len=len(source), delay=0)
            yield ChunkedRecord(pair, chunks)
        except RecordError as exc:
            _handle(exc, errors, skiplog, "bad chunk text record")


def format_labels(labels: BoundaryLabels) -> str:
    return json.dumps(
        {
            "id": labels.id,
            "source_flags": list(labels.source_flags),
            "target_flags": list(labels.target_flags),
            "delay": labels.delay,
            "trailing_empty": labels.trailing_empty,
        },
        separators=(",", ":"),
    )


def write_labels(labels_stream: Iterable[BoundaryLabels], path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for labels in labels_stream:
            f.write(format_labels(labels))
            f.write("\n")


def read_labels(
    path: str, *, errors: str = "raise", skiplog: SkipLog | None = None
) -> Iterator[BoundaryLabels]:
    with _open_read(path) as f:
        for lineno, line in enumerate(f, start=1):
            try:
                try:
                    obj = json.loads(line)
                    yield BoundaryLabels(
                        tuple(int(b) for b in obj["source_flags"]),
                        tuple(int(b) for b in obj["target_flags"]),
                        delay=int(obj.get("delay", 0)),
                        trailing_empty=int(obj.get("trailing_empty", 0)),
                        id=int(obj.get("id", lineno)),
                    )
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise RecordError(f"bad label record: {exc}", lineno) from exc
            except RecordError as exc:
                _handle(exc, errors, skiplog, "bad label record")


def parse_subword_map_line(
    line: str, *, joiner: str = DEFAULT_JOINER, record_id: int | None = None
) -> tuple[tuple[str, ...], ...]:
    words = []
    for field in line.split():
        parts = tuple(field.split(joiner))
        if any(not p for p in parts):
            raise RecordError(f"empty subword in map entry {field!r}", record_id)
        words.append(parts)
    return tuple(words)


def read_subword_maps(
    path: str, *, joiner: str = DEFAULT_JOINER
) -> Iterator[tuple[tuple[str, ...], ...]]:
    """Yield, per sentence, each word's subword expansion."""
    with _open_read(path) as f:
        for lineno, line in enumerate(f, start=1):
            yield parse_subword_map_line(line, joiner=joiner, record_id=lineno)


def project_to_subwords(
    record: ChunkedRecord,
    source_map: Sequence[Sequence[str]],
    target_map: Sequence[Sequence[str]],
) -> ChunkedRecord:
    """Re-express word-level chunk ends on the subword level.

    A boundary after word p becomes a boundary after the last subword of
    word p, so the chunk count never changes. The delay field keeps counting
    words; it rides along unchanged.
    """
    pair = record.pair
    for side, mapping, words in (
        ("source", source_map, pair.source),
        ("target", target_map, pair.target),
    ):
        if len(mapping) != len(words):
            raise FileFormatError(
                f"{side} subword map has {len(mapping)} entries for "
                f"{len(words)} words (record {pair.id})"
            )
        if any(len(expansion) == 0 for expansion in mapping):
            raise FileFormatError(f"empty {side} subword expansion (record {pair.id})")

    def cumulative(mapping: Sequence[Sequence[str]]) -> list[int]:
        ends = [0]
        for expansion in mapping:
            ends.append(ends[-1] + len(expansion))
        return ends

    src_cum = cumulative(source_map)
    tgt_cum = cumulative(target_map)
    new_pair = SentencePair(
        tuple(sub for expansion in source_map for sub in expansion),
        tuple(sub for expansion in target_map for sub in expansion),
        id=pair.id,
    )
    new_bounds = tuple((src_cum[s], tgt_cum[t]) for s, t in record.chunks.boundaries)
    chunks = DelayedChunkSequence(
        new_bounds, source_len=len(new_pair.source), delay=record.delay
    )
    return ChunkedRecord(new_pair, chunks)
