"""Shared domain types: sessions, turns, variables, stack entries, and NLP feature outputs."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

Value = str | bool | int | float

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

# Sum of probabilities in a nonempty distribution must be 1 within this slack.
DIST_TOLERANCE = 1e-9


class UnsetType:
    """Sentinel for a variable read that found nothing (never a default value)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNSET"

    def __bool__(self) -> bool:
        return False


UNSET = UnsetType()


def is_identifier(name: str) -> bool:
    return bool(_IDENT_RE.match(name))


class VariableTable:
    """Per-session store of learned facts, keyed by case-insensitive identifiers.

    Writes overwrite; reads of unset names return the UNSET sentinel so callers
    can distinguish "never learned" from any stored value.
    """

    def __init__(self, entries: dict[str, Value] | None = None):
        self._entries: dict[str, Value] = {}
        if entries:
            for name, value in entries.items():
                self.set(name, value)

    def set(self, name: str, value: Value) -> None:
        if not is_identifier(name):
            raise ValueError(f"invalid variable name: {name!r}")
        if not isinstance(value, (str, bool, int, float)):
            raise TypeError(f"unsupported variable value for {name!r}: {type(value).__name__}")
        self._entries[name.lower()] = value

    def get(self, name: str) -> Value | UnsetType:
        return self._entries.get(name.lower(), UNSET)

    def has(self, name: str) -> bool:
        return name.lower() in self._entries

    def as_dict(self) -> dict[str, Value]:
        return dict(self._entries)

    def copy(self) -> "VariableTable":
        return VariableTable(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, VariableTable) and self._entries == other._entries

    def __repr__(self) -> str:
        return f"VariableTable({self._entries!r})"


@dataclass
class StackEntry:
    """A dialogue state parked for later resumption, with a remaining-turn budget."""

    state_id: str
    life: int

    def __post_init__(self):
        if self.life < 0:
            raise ValueError("life must be non-negative")


@dataclass
class SessionState:
    """Cursor for one conversation: current state, learned variables, and the resume stack.

    turn_index counts completed user turns. rng_seed plus turn_index fully
    determine every random draw, so replaying the same utterances reproduces
    the session exactly.
    """

    session_id: str
    current_state: str
    variables: VariableTable = field(default_factory=VariableTable)
    stack: list[StackEntry] = field(default_factory=list)
    turn_index: int = 0
    rng_seed: int = 0
    history: list[tuple[str, str]] = field(default_factory=list)
    # Consecutive unmatched utterances at the current user state; resets on any
    # successful transition. Drives the one-retry fallback policy.
    retry_count: int = 0
    components_visited: set[str] = field(default_factory=set)


@dataclass
class TokenizedUtterance:
    raw: str
    tokens: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.tokens)


_CURLY_APOSTROPHES = {"’": "'", "‘": "'"}


def normalize_utterance(raw: str) -> TokenizedUtterance:
    """Lowercase, strip punctuation (keeping intra-token apostrophes), and tokenize.

    Every matcher in the system works over this normalization so token indices
    agree across modules.
    """
    lowered = raw.lower()
    for curly, straight in _CURLY_APOSTROPHES.items():
        lowered = lowered.replace(curly, straight)
    kept = [ch if ch.isalnum() or ch == "'" else " " for ch in lowered]
    tokens = []
    for piece in "".join(kept).split():
        token = piece.strip("'")
        if token:
            tokens.append(token)
    return TokenizedUtterance(raw=raw, tokens=tuple(tokens))


def normalize_phrase(text: str) -> tuple[str, ...]:
    """Normalized token tuple for a phrase, without keeping the raw string."""
    return normalize_utterance(text).tokens


@dataclass
class LabelDistribution:
    """Probabilities over labels; empty means "no opinion"."""

    probs: dict[str, float] = field(default_factory=dict)

    def validate(self) -> None:
        for label, p in self.probs.items():
            if not (0.0 - DIST_TOLERANCE <= p <= 1.0 + DIST_TOLERANCE):
                raise ValueError(f"probability out of range for {label!r}: {p}")
        if self.probs:
            total = sum(self.probs.values())
            if abs(total - 1.0) > DIST_TOLERANCE:
                raise ValueError(f"distribution sums to {total}, not 1.0")

    def argmax(self) -> str | None:
        if not self.probs:
            return None
        # Ties broken by label so the result is stable.
        return max(sorted(self.probs), key=lambda label: self.probs[label])

    def get(self, label: str) -> float:
        return self.probs.get(label, 0.0)

    def __bool__(self) -> bool:
        return bool(self.probs)


@dataclass
class EntityMention:
    """An index hit inside an utterance, spanning tokens [start, end)."""

    surface: str
    start: int
    end: int
    entity_id: str
    entity_type: str

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise ValueError(f"bad mention span [{self.start}, {self.end})")


@dataclass
class FeatureBundle:
    """Per-utterance NLP outputs, filled in two rounds.

    Round 1: sentiment, entities, qa_answer. Round 2: topic_dist and
    intent_dist, which may read round-1 fields. A failed extractor leaves its
    field at None/empty and adds a diagnostic; it never aborts the turn.
    """

    sentiment: float | None = None
    entities: list[EntityMention] = field(default_factory=list)
    topic_dist: LabelDistribution | None = None
    intent_dist: LabelDistribution | None = None
    qa_answer: str | None = None
    diagnostics: list[str] = field(default_factory=list)
