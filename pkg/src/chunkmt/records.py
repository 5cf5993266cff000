"""Core record types shared across the toolkit.

Positions are 1-based throughout: a link (s, t) joins source word s and
target word t, and a chunk boundary (s_end, t_end) names the last source and
target word of its chunk. On-disk formats that count from 0 (Pharaoh) are
converted in the I/O layer and nowhere else.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import RecordError

Link = tuple[int, int]


def _check_tokens(tokens: tuple[str, ...], side: str, record_id: int) -> None:
    if len(tokens) == 0:
        raise RecordError(f"empty {side} sentence", record_id)
    for tok in tokens:
        if not tok or tok.split() != [tok]:
            raise RecordError(f"bad {side} token {tok!r} (empty or contains whitespace)", record_id)


@dataclass(frozen=True)
class SentencePair:
    """A tokenized sentence and its translation."""

    source: tuple[str, ...]
    target: tuple[str, ...]
    id: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "source", tuple(self.source))
        object.__setattr__(self, "target", tuple(self.target))
        _check_tokens(self.source, "source", self.id)
        _check_tokens(self.target, "target", self.id)


@dataclass(frozen=True)
class AlignmentLinkSet:
    """Symmetrized word links for one sentence pair."""

    links: frozenset[Link]
    source_len: int
    target_len: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "links", frozenset((int(s), int(t)) for s, t in self.links))
        for s, t in self.links:
            if not (1 <= s <= self.source_len and 1 <= t <= self.target_len):
                raise RecordError(
                    f"link ({s},{t}) outside sentence of size "
                    f"{self.source_len}x{self.target_len}"
                )


@dataclass(frozen=True)
class DirectionalAlignment:
    """One-directional alignment: each position on the modeled side links at most once."""

    links: frozenset[Link]
    direction: str  # "s2t" or "t2s"
    source_len: int
    target_len: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "links", frozenset((int(s), int(t)) for s, t in self.links))
        if self.direction not in ("s2t", "t2s"):
            raise RecordError(f"unknown alignment direction {self.direction!r}")
        for s, t in self.links:
            if not (1 <= s <= self.source_len and 1 <= t <= self.target_len):
                raise RecordError(
                    f"link ({s},{t}) outside sentence of size "
                    f"{self.source_len}x{self.target_len}"
                )
        keyed = [s for s, _ in self.links] if self.direction == "s2t" else [t for _, t in self.links]
        if len(keyed) != len(set(keyed)):
            side = "source" if self.direction == "s2t" else "target"
            raise RecordError(f"{self.direction} alignment links a {side} position more than once")


@dataclass(frozen=True)
class ChunkSequence:
    """Monotonic segmentation as cumulative (source_end, target_end) pairs.

    Both components are strictly increasing and the last pair names the
    sentence lengths, so the sequence fully determines every chunk span.
    """

    boundaries: tuple[Link, ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "boundaries", tuple((int(s), int(t)) for s, t in self.boundaries)
        )
        if not self.boundaries:
            raise RecordError("chunk sequence is empty")
        prev_s = prev_t = 0
        for s, t in self.boundaries:
            if s <= prev_s or t <= prev_t:
                raise RecordError(f"chunk ends not strictly increasing: {self.boundaries}")
            prev_s, prev_t = s, t

    @property
    def k(self) -> int:
        return len(self.boundaries)

    @property
    def source_len(self) -> int:
        return self.boundaries[-1][0]

    @property
    def target_len(self) -> int:
        return self.boundaries[-1][1]


@dataclass(frozen=True)
class DelayedChunkSequence:
    """Chunk ends after a source-side shift; ends may stick at the sentence end.

    Target ends stay strictly increasing. Source ends are non-decreasing and
    may repeat only once clamped to source_len (empty source chunks at the
    sentence end). The final source end may fall short of source_len (wait-k
    schedules); the unread tail is consumed at stream end during simulation.
    """

    boundaries: tuple[Link, ...]
    source_len: int
    delay: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "boundaries", tuple((int(s), int(t)) for s, t in self.boundaries)
        )
        if not self.boundaries:
            raise RecordError("chunk sequence is empty")
        if self.delay < 0:
            raise RecordError(f"negative delay {self.delay}")
        prev_s = prev_t = 0
        for s, t in self.boundaries:
            if t <= prev_t:
                raise RecordError(f"target chunk ends not strictly increasing: {self.boundaries}")
            if s < 1 or s > self.source_len:
                raise RecordError(f"source chunk end {s} outside sentence of {self.source_len}")
            if s < prev_s:
                raise RecordError(f"source chunk ends decrease: {self.boundaries}")
            if s == prev_s and s != self.source_len:
                raise RecordError(
                    f"empty source chunk before sentence end at {s}: {self.boundaries}"
                )
            prev_s, prev_t = s, t

    @property
    def k(self) -> int:
        return len(self.boundaries)

    @property
    def target_len(self) -> int:
        return self.boundaries[-1][1]

    def as_undelayed(self) -> ChunkSequence:
        """View as a strict word-level sequence; rejects shifted or truncated ones."""
        if self.delay != 0:
            raise RecordError(f"chunk sequence carries a delay of {self.delay}")
        if self.boundaries[-1][0] != self.source_len:
            raise RecordError("source tail not covered by the final chunk")
        return ChunkSequence(self.boundaries)

    @classmethod
    def from_undelayed(cls, chunks: ChunkSequence) -> "DelayedChunkSequence":
        return cls(chunks.boundaries, source_len=chunks.source_len, delay=0)


@dataclass(frozen=True)
class ChunkedRecord:
    """A sentence pair together with its chunk segmentation."""

    pair: SentencePair
    chunks: DelayedChunkSequence

    def __post_init__(self) -> None:
        if self.chunks.source_len != len(self.pair.source):
            raise RecordError(
                f"chunks cover {self.chunks.source_len} source words, "
                f"sentence has {len(self.pair.source)}",
                self.pair.id,
            )
        if self.chunks.target_len != len(self.pair.target):
            raise RecordError(
                f"chunks cover {self.chunks.target_len} target words, "
                f"sentence has {len(self.pair.target)}",
                self.pair.id,
            )

    @property
    def id(self) -> int:
        return self.pair.id

    @property
    def delay(self) -> int:
        return self.chunks.delay

    def source_chunks(self) -> list[tuple[str, ...]]:
        out, prev = [], 0
        for s, _ in self.chunks.boundaries:
            out.append(self.pair.source[prev:s])
            prev = s
        return out

    def target_chunks(self) -> list[tuple[str, ...]]:
        out, prev = [], 0
        for _, t in self.chunks.boundaries:
            out.append(self.pair.target[prev:t])
            prev = t
        return out


@dataclass(frozen=True)
class BoundaryLabels:
    """Per-position chunk-end flags used as a training signal.

    A source flag marks the last word of some chunk; likewise on the target
    side. Chunks that add no source words (clamped ends at the sentence end)
    collapse onto one source flag, so their count travels separately in
    trailing_empty to keep the labels invertible.
    """

    source_flags: tuple[int, ...]
    target_flags: tuple[int, ...]
    delay: int = 0
    trailing_empty: int = 0
    id: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "source_flags", tuple(int(b) for b in self.source_flags))
        object.__setattr__(self, "target_flags", tuple(int(b) for b in self.target_flags))
        for flags, side in ((self.source_flags, "source"), (self.target_flags, "target")):
            if not flags:
                raise RecordError(f"empty {side} flags", self.id)
            if any(b not in (0, 1) for b in flags):
                raise RecordError(f"{side} flags must be 0/1", self.id)
        if self.target_flags[-1] != 1:
            raise RecordError("final target position must end a chunk", self.id)
        if self.trailing_empty < 0:
            raise RecordError("negative trailing_empty", self.id)
        if self.trailing_empty and self.source_flags[-1] != 1:
            raise RecordError(
                "trailing empty chunks require a chunk end at the last source position", self.id
            )
        n_src = sum(self.source_flags)
        n_tgt = sum(self.target_flags)
        if n_src + self.trailing_empty != n_tgt:
            raise RecordError(
                f"{n_src} source chunk ends + {self.trailing_empty} trailing empty "
                f"chunks cannot yield {n_tgt} target chunk ends",
                self.id,
            )
