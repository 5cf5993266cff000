"""Symmetrize two directional word alignments into one link set.

Implements grow-diag-final-and plus plain intersection/union for
diagnostics. The grow stage walks the 8-neighborhood (diagonals included)
of already-accepted links and admits union links whose source or target
word is still unaligned; final-and then admits union links with both words
unaligned.

Additions happen in synchronous rounds: eligibility is evaluated against
the state at the start of a round and all eligible links are added at once.
This makes the fixpoint independent of any enumeration order, which the
test suite asserts by shuffling link orders.
"""

from __future__ import annotations

from .errors import FileFormatError
from .records import AlignmentLinkSet, DirectionalAlignment

_NEIGHBORS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))

METHODS = ("grow-diag-final-and", "intersection", "union")


def _require_same_shape(s2t: DirectionalAlignment, t2s: DirectionalAlignment) -> None:
    if (s2t.source_len, s2t.target_len) != (t2s.source_len, t2s.target_len):
        raise FileFormatError(
            f"directional alignments disagree on sentence size: "
            f"{s2t.source_len}x{s2t.target_len} vs {t2s.source_len}x{t2s.target_len}"
        )


def intersect(s2t: DirectionalAlignment, t2s: DirectionalAlignment) -> AlignmentLinkSet:
    _require_same_shape(s2t, t2s)
    return AlignmentLinkSet(s2t.links & t2s.links, s2t.source_len, s2t.target_len)


def union(s2t: DirectionalAlignment, t2s: DirectionalAlignment) -> AlignmentLinkSet:
    _require_same_shape(s2t, t2s)
    return AlignmentLinkSet(s2t.links | t2s.links, s2t.source_len, s2t.target_len)


def grow_diag_final_and(
    s2t: DirectionalAlignment, t2s: DirectionalAlignment
) -> AlignmentLinkSet:
    """Symmetrize; the result always satisfies intersection <= result <= union."""
    _require_same_shape(s2t, t2s)
    both = s2t.links & t2s.links
    either = s2t.links | t2s.links
    result = set(both)

    while True:
        covered_s = {s for s, _ in result}
        covered_t = {t for _, t in result}
        added = set()
        for s, t in either - result:
            if s in covered_s and t in covered_t:
                continue
            if any((s + ds, t + dt) in result for ds, dt in _NEIGHBORS):
                added.add((s, t))
        if not added:
            break
        result |= added

    covered_s = {s for s, _ in result}
    covered_t = {t for _, t in result}
    result |= {
        (s, t) for s, t in either - result if s not in covered_s and t not in covered_t
    }
    return AlignmentLinkSet(frozenset(result), s2t.source_len, s2t.target_len)


def symmetrize(
    s2t: DirectionalAlignment,
    t2s: DirectionalAlignment,
    method: str = "grow-diag-final-and",
) -> AlignmentLinkSet:
    if method == "grow-diag-final-and":
        return grow_diag_final_and(s2t, t2s)
    if method == "intersection":
        return intersect(s2t, t2s)
    if method == "union":
        return union(s2t, t2s)
    raise FileFormatError(f"unknown symmetrization method {method!r}")
