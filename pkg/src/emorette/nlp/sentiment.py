"""Rule-lexicon sentiment scoring over normalized utterances.

Rules: sum of token valences, a negator within the 3 preceding tokens
multiplies a valence by -0.74, a booster immediately before a token shifts it
by the booster magnitude toward the valence's sign, and the total is squashed
by s / sqrt(s^2 + 15) into [-1, +1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..core import TokenizedUtterance

NEGATION_SCALAR = -0.74
NEGATION_WINDOW = 3
NORMALIZATION_ALPHA = 15.0
VALENCE_RANGE = 4.0


class LexiconError(ValueError):
    pass


@dataclass
class SentimentLexicon:
    valences: dict[str, float] = field(default_factory=dict)
    negators: set[str] = field(default_factory=set)
    boosters: dict[str, float] = field(default_factory=dict)

    def validate(self) -> None:
        for token, valence in self.valences.items():
            if not (-VALENCE_RANGE <= valence <= VALENCE_RANGE):
                raise LexiconError(f"valence out of range for {token!r}: {valence}")
        overlap = self.negators & set(self.boosters)
        if overlap:
            raise LexiconError(f"tokens are both negator and booster: {sorted(overlap)}")


def load_lexicon(source: str) -> SentimentLexicon:
    """Parse `token<TAB>valence` lines plus `!negator` / `!booster` directives."""
    lex = SentimentLexicon()
    for lineno, raw_line in enumerate(source.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("!negator"):
            parts = line.split()
            if len(parts) != 2:
                raise LexiconError(f"line {lineno}: expected '!negator token'")
            lex.negators.add(parts[1].lower())
        elif line.startswith("!booster"):
            parts = line.split()
            if len(parts) != 3:
                raise LexiconError(f"line {lineno}: expected '!booster token value'")
            try:
                lex.boosters[parts[1].lower()] = float(parts[2])
            except ValueError as exc:
                raise LexiconError(f"line {lineno}: bad booster value") from exc
        else:
            parts = line.split("\t")
            if len(parts) != 2:
                raise LexiconError(f"line {lineno}: expected 'token<TAB>valence'")
            try:
                lex.valences[parts[0].strip().lower()] = float(parts[1])
            except ValueError as exc:
                raise LexiconError(f"line {lineno}: bad valence") from exc
    lex.validate()
    return lex


def score_sentiment(lex: SentimentLexicon, u: TokenizedUtterance) -> float:
    """Compound sentiment in [-1, +1]; 0.0 for utterances with no lexicon hits."""
    total = 0.0
    tokens = u.tokens
    for i, token in enumerate(tokens):
        valence = lex.valences.get(token)
        if valence is None:
            continue
        if i > 0:
            magnitude = lex.boosters.get(tokens[i - 1])
            if magnitude is not None:
                if valence > 0:
                    valence += magnitude
                elif valence < 0:
                    valence -= magnitude
        window = tokens[max(0, i - NEGATION_WINDOW):i]
        if any(t in lex.negators for t in window):
            valence *= NEGATION_SCALAR
        total += valence
    if total == 0.0:
        return 0.0
    compound = total / math.sqrt(total * total + NORMALIZATION_ALPHA)
    return max(-1.0, min(1.0, compound))
