"""Chunk operations: extraction, delay, LM-based merging, wait-k, labels, statistics.

Chunk extraction finds the finest segmentation of a sentence pair into
monotonic bilingual chunks such that no alignment link crosses a chunk
boundary in either dimension. Unaligned words attach to the chunk before
them (sentence-initial ones to the first chunk), so a chunk other than the
first can never start with an unaligned word.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Protocol

from .errors import RecordError
from .lm import BEGIN_TOKEN
from .records import (
    AlignmentLinkSet,
    BoundaryLabels,
    ChunkedRecord,
    ChunkSequence,
    DelayedChunkSequence,
    SentencePair,
)


def extract_chunks(pair: SentencePair, alignment: AlignmentLinkSet) -> ChunkSequence:
    """Extract the finest monotonic segmentation that keeps every link inside a chunk.

    Single left-to-right sweep. A cut after source position j is valid iff
      - the next source word is aligned (unaligned words never start a chunk),
      - some aligned source word lies at or before j, and
      - every link to the right of j points at a target beyond the running
        prefix maximum of aligned target positions (no crossing).
    The paired target end is one before the smallest target position linked
    from the right-hand side, which leaves unaligned target words with the
    chunk before them. A pair without any links comes back as one chunk.
    """
    src_len, tgt_len = len(pair.source), len(pair.target)
    if alignment.source_len != src_len or alignment.target_len != tgt_len:
        raise RecordError(
            f"alignment sized {alignment.source_len}x{alignment.target_len} does not "
            f"match sentence pair {src_len}x{tgt_len}",
            pair.id,
        )

    max_target = [0] * (src_len + 1)
    min_target = [tgt_len + 1] * (src_len + 1)
    for s, t in alignment.links:
        max_target[s] = max(max_target[s], t)
        min_target[s] = min(min_target[s], t)

    prefix_max = [0] * (src_len + 1)
    for j in range(1, src_len + 1):
        prefix_max[j] = max(prefix_max[j - 1], max_target[j])
    # suffix_min[j] = smallest target linked from any source position > j
    suffix_min = [tgt_len + 1] * (src_len + 1)
    for j in range(src_len - 1, -1, -1):
        suffix_min[j] = min(suffix_min[j + 1], min_target[j + 1])

    boundaries = []
    for j in range(1, src_len):
        if max_target[j + 1] == 0:
            continue
        if prefix_max[j] == 0:
            continue
        if suffix_min[j] > prefix_max[j]:
            boundaries.append((j, suffix_min[j] - 1))
    boundaries.append((src_len, tgt_len))
    return ChunkSequence(tuple(boundaries))


def apply_delay(chunks: ChunkSequence, delay: int) -> DelayedChunkSequence:
    """Shift every source chunk end right by a constant, clamped at the sentence end.

    Target ends stay untouched; clamping may create empty source chunks at
    the sentence end. A delay of 0 leaves the boundaries as they are.
    """
    if delay < 0:
        raise RecordError(f"negative delay {delay}")
    src_len = chunks.source_len
    bounds = tuple((min(s + delay, src_len), t) for s, t in chunks.boundaries)
    return DelayedChunkSequence(bounds, source_len=src_len, delay=delay)


class BigramScorer(Protocol):
    def score(self, word: str, history: str) -> float: ...


@dataclass(frozen=True)
class MergeConfig:
    """Knobs for LM-based boundary removal.

    The removal test compares log-probabilities; the current chunk's length
    enters as length**length_exponent, so longer chunks resist merging.
    """

    length_exponent: float = 0.5


def merge_chunks_lm(
    chunks: ChunkSequence,
    pair: SentencePair,
    forward_lm: BigramScorer,
    reverse_lm: BigramScorer,
    config: MergeConfig = MergeConfig(),
) -> ChunkSequence:
    """Remove chunk boundaries whose right-hand neighbor predicts the chunk-final word.

    One left-to-right pass. The boundary after target word w is dropped iff
    log p_rev(w | next word) exceeds log l + log p_fwd(w | previous word),
    where l = (current chunk length) ** length_exponent and the current
    chunk reflects merges already performed to its left. The sentence-final
    boundary is never considered, so the result is a coarsening of the input.
    """
    if chunks.source_len != len(pair.source) or chunks.target_len != len(pair.target):
        raise RecordError(
            f"chunks sized {chunks.source_len}x{chunks.target_len} do not match "
            f"sentence pair {len(pair.source)}x{len(pair.target)}",
            pair.id,
        )
    kept = []
    chunk_start = 0  # target end of the last kept boundary
    for s, t in chunks.boundaries[:-1]:
        last_word = pair.target[t - 1]
        history = pair.target[t - 2] if t >= 2 else BEGIN_TOKEN
        next_word = pair.target[t]
        log_fwd = forward_lm.score(last_word, history)
        log_rev = reverse_lm.score(last_word, next_word)
        log_l = config.length_exponent * math.log(t - chunk_start)
        if log_rev == -math.inf:
            remove = False
        elif log_fwd == -math.inf:
            remove = True
        else:
            remove = log_rev > log_l + log_fwd
        if not remove:
            kept.append((s, t))
            chunk_start = t
    kept.append(chunks.boundaries[-1])
    return ChunkSequence(tuple(kept))


def waitk_chunks(pair: SentencePair, k: int) -> DelayedChunkSequence:
    """Fixed schedule: first source chunk of size k, then one word per chunk.

    Every target word ends its own chunk; source ends clamp at the sentence
    end, so long targets produce trailing chunks that add no source words.
    The schedule ignores alignments entirely and records a delay of 0.
    """
    if k < 1:
        raise RecordError(f"wait-k requires k >= 1, got {k}")
    src_len, tgt_len = len(pair.source), len(pair.target)
    bounds = tuple((min(k + m - 1, src_len), m) for m in range(1, tgt_len + 1))
    return DelayedChunkSequence(bounds, source_len=src_len, delay=0)


def emit_labels(chunks: DelayedChunkSequence, *, record_id: int = 0) -> BoundaryLabels:
    """Turn chunk ends into per-position 0/1 flags.

    Chunk ends collapsed onto the final source position by clamping share a
    single flag; their count is preserved in trailing_empty so the exact
    sequence stays recoverable.
    """
    src_ends = {s for s, _ in chunks.boundaries}
    tgt_ends = {t for _, t in chunks.boundaries}
    return BoundaryLabels(
        tuple(1 if j in src_ends else 0 for j in range(1, chunks.source_len + 1)),
        tuple(1 if i in tgt_ends else 0 for i in range(1, chunks.target_len + 1)),
        delay=chunks.delay,
        trailing_empty=chunks.k - len(src_ends),
        id=record_id,
    )


def chunks_from_labels(labels: BoundaryLabels) -> DelayedChunkSequence:
    """Rebuild the chunk sequence a set of labels was emitted from."""
    src_ends = [j for j, b in enumerate(labels.source_flags, start=1) if b]
    tgt_ends = [i for i, b in enumerate(labels.target_flags, start=1) if b]
    src_ends.extend([src_ends[-1]] * labels.trailing_empty)
    return DelayedChunkSequence(
        tuple(zip(src_ends, tgt_ends)),
        source_len=len(labels.source_flags),
        delay=labels.delay,
    )


@dataclass
class ChunkStats:
    """Mergeable chunk-length aggregates.

    Lengths count words. Empty source chunks enter the histogram at length 0
    and are reported on their own; they stay in the denominators of the mean
    and both fractions. An empty corpus reports every figure as None.
    """

    records: int = 0
    source_hist: dict[int, int] = field(default_factory=dict)
    target_hist: dict[int, int] = field(default_factory=dict)

    def add(self, record: ChunkedRecord) -> None:
        self.records += 1
        prev_s = prev_t = 0
        for s, t in record.chunks.boundaries:
            self.source_hist[s - prev_s] = self.source_hist.get(s - prev_s, 0) + 1
            self.target_hist[t - prev_t] = self.target_hist.get(t - prev_t, 0) + 1
            prev_s, prev_t = s, t

    def combine(self, other: "ChunkStats") -> "ChunkStats":
        merged = ChunkStats(records=self.records + other.records)
        for mine, theirs, out in (
            (self.source_hist, other.source_hist, merged.source_hist),
            (self.target_hist, other.target_hist, merged.target_hist),
        ):
            for hist in (mine, theirs):
                for length, count in hist.items():
                    out[length] = out.get(length, 0) + count
        return merged

    @staticmethod
    def _side(hist: dict[int, int]) -> dict:
        chunks = sum(hist.values())
        if chunks == 0:
            return {
                "chunks": 0,
                "mean_length": None,
                "single_word_fraction": None,
                "longer_than_3_fraction": None,
                "empty_chunks": 0,
                "histogram": {},
            }
        words = sum(length * count for length, count in hist.items())
        return {
            "chunks": chunks,
            "mean_length": words / chunks,
            "single_word_fraction": hist.get(1, 0) / chunks,
            "longer_than_3_fraction": sum(c for l, c in hist.items() if l > 3) / chunks,
            "empty_chunks": hist.get(0, 0),
            "histogram": {length: hist[length] for length in sorted(hist)},
        }

    def summary(self) -> dict:
        return {
            "records": self.records,
            "source": self._side(self.source_hist),
            "target": self._side(self.target_hist),
        }

    def render_text(self) -> str:
        lines = [f"records: {self.records}"]
        for side in ("source", "target"):
            s = self.summary()[side]
            if s["chunks"] == 0:
                lines.append(f"{side}: no chunks")
                continue
            lines.append(
                f"{side}: {s['chunks']} chunks, mean length {s['mean_length']:.4f}, "
                f"single-word {s['single_word_fraction']:.4f}, "
                f">3 words {s['longer_than_3_fraction']:.4f}, "
                f"empty {s['empty_chunks']}"
            )
        return "\n".join(lines)


def chunk_stats(records: Iterable[ChunkedRecord]) -> ChunkStats:
    stats = ChunkStats()
    for record in records:
        stats.add(record)
    return stats
