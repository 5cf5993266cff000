"""Target-side bigram language models with interpolated absolute discounting.

Sentences are padded with a begin token (history only) and an end token
(predicted). The reverse direction trains on reversed sentences, so
score(word, history) there estimates p(word | the word after it).

Smoothing: p(w|h) = max(c(h,w) - d, 0)/c(h) + d * N1+(h)/c(h) * p_uni(w),
with p_uni the relative frequency of predicted tokens. Words never seen in
training map to an unknown token whose unigram probability is a small
configurable floor; it sits outside the normalized vocabulary mass, so the
distribution over the trained vocabulary still sums to one per history.
Histories never seen in training back off to the unigram distribution.
"""

from __future__ import annotations

import math
from collections import Counter
from typing import Iterable, Sequence

from .errors import FileFormatError

BEGIN_TOKEN = "<s>"
END_TOKEN = "</s>"
UNK_TOKEN = "<unk>"

DEFAULT_DISCOUNT = 0.75
DEFAULT_UNK_FLOOR = 1e-6

DIRECTIONS = ("forward", "reverse")
TOKEN_LEVELS = ("word", "subword")


class BigramModel:
    """Smoothed bigram model over one direction of the target corpus."""

    def __init__(
        self,
        bigram_counts: dict[tuple[str, str], int],
        *,
        direction: str = "forward",
        discount: float = DEFAULT_DISCOUNT,
        unk_floor: float = DEFAULT_UNK_FLOOR,
        token_level: str = "word",
    ):
        if direction not in DIRECTIONS:
            raise FileFormatError(f"unknown model direction {direction!r}")
        if not 0.0 < discount < 1.0:
            raise FileFormatError(f"discount must lie in (0, 1), got {discount}")
        if not 0.0 < unk_floor < 1.0:
            raise FileFormatError(f"unk_floor must lie in (0, 1), got {unk_floor}")
        if token_level not in TOKEN_LEVELS:
            raise FileFormatError(f"unknown token level {token_level!r}")
        self.direction = direction
        self.discount = discount
        self.unk_floor = unk_floor
        self.token_level = token_level
        self.bigram_counts = dict(bigram_counts)
        self.history_counts: Counter[str] = Counter()
        self.predicted_counts: Counter[str] = Counter()
        self.continuations: Counter[str] = Counter()
        for (h, w), count in self.bigram_counts.items():
            if count <= 0:
                raise FileFormatError(f"non-positive count for bigram {(h, w)}")
            self.history_counts[h] += count
            self.predicted_counts[w] += count
            self.continuations[h] += 1
        self.predicted_total = sum(self.predicted_counts.values())
        if self.predicted_total == 0:
            raise FileFormatError("model holds no counts")

    @property
    def vocabulary(self) -> set[str]:
        """Predictable types: every observed word plus the end token."""
        return set(self.predicted_counts)

    @classmethod
    def train(
        cls,
        sentences: Iterable[Sequence[str]],
        *,
        direction: str = "forward",
        discount: float = DEFAULT_DISCOUNT,
        unk_floor: float = DEFAULT_UNK_FLOOR,
        token_level: str = "word",
    ) -> "BigramModel":
        """Count padded bigrams over the corpus, reversing sentences first if asked."""
        if direction not in DIRECTIONS:
            raise FileFormatError(f"unknown model direction {direction!r}")
        counts: Counter[tuple[str, str]] = Counter()
        n_sentences = 0
        for sentence in sentences:
            n_sentences += 1
            tokens = list(sentence)
            if direction == "reverse":
                tokens.reverse()
            prev = BEGIN_TOKEN
            for token in tokens + [END_TOKEN]:
                counts[(prev, token)] += 1
                prev = token
        if n_sentences == 0:
            raise FileFormatError("cannot train a model on an empty corpus")
        return cls(
            dict(counts),
            direction=direction,
            discount=discount,
            unk_floor=unk_floor,
            token_level=token_level,
        )

    def unigram_probability(self, word: str) -> float:
        count = self.predicted_counts.get(word, 0)
        if count == 0:
            return self.unk_floor
        return count / self.predicted_total

    def probability(self, word: str, history: str) -> float:
        if word not in self.predicted_counts and word != UNK_TOKEN:
            word = UNK_TOKEN
        p_uni = self.unigram_probability(word)
        history_count = self.history_counts.get(history, 0)
        if history_count == 0:
            return p_uni
        discounted = max(self.bigram_counts.get((history, word), 0) - self.discount, 0.0)
        backoff_weight = self.discount * self.continuations[history] / history_count
        return discounted / history_count + backoff_weight * p_uni

    def score(self, word: str, history: str) -> float:
        """Log-probability of word given the preceding (forward) or following (reverse) word."""
        return math.log(self.probability(word, history))

    def save(self, path: str) -> None:
        """Sorted plain-text counts with a small header; reloads bit-exact."""
        with open(path, "w", encoding="utf-8") as f:
            f.write(f"direction\t{self.direction}\n")
            f.write(f"discount\t{self.discount!r}\n")
            f.write(f"unk_floor\t{self.unk_floor!r}\n")
            f.write(f"token_level\t{self.token_level}\n")
            for (h, w), count in sorted(self.bigram_counts.items()):
                f.write(f"{h} {w}\t{count}\n")

    @classmethod
    def load(cls, path: str) -> "BigramModel":
        header: dict[str, str] = {}
        counts: dict[tuple[str, str], int] = {}
        with open(path, "r", encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                left, sep, right = line.partition("\t")
                if not sep:
                    raise FileFormatError(f"{path}:{lineno}: expected a tab")
                tokens = left.split(" ")
                if len(tokens) == 1:
                    header[left] = right
                elif len(tokens) == 2:
                    try:
                        counts[(tokens[0], tokens[1])] = int(right)
                    except ValueError as exc:
                        raise FileFormatError(f"{path}:{lineno}: bad count {right!r}") from exc
                else:
                    raise FileFormatError(f"{path}:{lineno}: bad count line {line!r}")
        try:
            return cls(
                counts,
                direction=header["direction"],
                discount=float(header["discount"]),
                unk_floor=float(header["unk_floor"]),
                token_level=header.get("token_level", "word"),
            )
        except KeyError as exc:
            raise FileFormatError(f"{path}: missing header field {exc}") from exc
