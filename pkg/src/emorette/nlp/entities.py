"""Gazetteer entity linking: exact n-gram lookup against a surface-form index."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..core import EntityMention, TokenizedUtterance, normalize_phrase

DEFAULT_MAX_NGRAM = 5


@dataclass
class EntityIndex:
    """Map from normalized surface phrase to (entity_id, entity_type).

    Built as a plain hash over token tuples so loading stays linear in the
    number of lines; the production-scale index is millions of keys.
    """

    phrases: dict[tuple[str, ...], tuple[str, str]] = field(default_factory=dict)
    source: str = ""
    max_ngram: int = DEFAULT_MAX_NGRAM

    @property
    def size(self) -> int:
        return len(self.phrases)


def load_entity_index(source: str, source_tag: str = "", max_ngram: int = DEFAULT_MAX_NGRAM) -> EntityIndex:
    """Parse `phrase<TAB>entity_id<TAB>entity_type` lines; later duplicates win."""
    idx = EntityIndex(source=source_tag, max_ngram=max_ngram)
    for lineno, raw_line in enumerate(source.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"entity index line {lineno}: expected 3 tab-separated fields")
        tokens = normalize_phrase(parts[0])
        if not tokens:
            continue
        idx.phrases[tokens] = (parts[1].strip(), parts[2].strip())
    return idx


def link_entities(idx: EntityIndex, u: TokenizedUtterance) -> list[EntityMention]:
    """All index hits over n-grams (n up to idx.max_ngram), overlaps resolved
    longest-match-first with leftmost winning ties; output is non-overlapping
    and sorted by start."""
    n = len(u.tokens)
    candidates: list[tuple[int, int, tuple[str, str]]] = []
    for length in range(1, min(idx.max_ngram, n) + 1):
        for start in range(0, n - length + 1):
            hit = idx.phrases.get(u.tokens[start:start + length])
            if hit is not None:
                candidates.append((length, start, hit))
    candidates.sort(key=lambda c: (-c[0], c[1]))

    chosen: list[EntityMention] = []
    occupied: set[int] = set()
    for length, start, (entity_id, entity_type) in candidates:
        span = range(start, start + length)
        if any(i in occupied for i in span):
            continue
        occupied.update(span)
        chosen.append(
            EntityMention(
                surface=" ".join(u.tokens[start:start + length]),
                start=start,
                end=start + length,
                entity_id=entity_id,
                entity_type=entity_type,
            )
        )
    chosen.sort(key=lambda m: m.start)
    return chosen
