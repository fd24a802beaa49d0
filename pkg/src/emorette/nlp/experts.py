"""Rule-based base classifiers, specializing experts, and the QA client stub.

The base classifiers stand in for the platform-provided topic/intent models;
experts refine their distributions through the mixture. Everything here is a
pluggable implementation of the same small interfaces, so learned models can
replace any piece without touching the pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

from ..core import FeatureBundle, LabelDistribution, TokenizedUtterance, normalize_phrase
from .moe import ExpertOutput

INTENT_LABELS = (
    "Yes-Answers",
    "No-Answer",
    "Reject",
    "Topic-Switching",
    "Question",
    "Statement",
)

TOPIC_KEYWORDS: dict[str, tuple[str, ...]] = {
    "Movies": ("movie", "movies", "film", "films", "cinema", "watched", "actor"),
    "Music": ("music", "song", "songs", "album", "band", "concert", "singer"),
    "Food-Drinks": ("food", "eat", "eating", "dinner", "lunch", "restaurant", "cooking", "drink"),
    "Travel-Geo": ("travel", "trip", "vacation", "visit", "city", "country", "flight"),
    "Pets-Animals": ("pet", "pets", "dog", "dogs", "cat", "cats", "animal", "animals"),
    "Sports": ("sports", "game", "team", "basketball", "football", "soccer", "baseball"),
    "Video-Games": ("videogame", "videogames", "gaming", "console", "playstation", "xbox", "nintendo"),
}

ENTITY_TYPE_TOPICS: dict[str, str] = {
    "movie": "Movies",
    "artist": "Music",
    "band": "Music",
    "song": "Music",
    "city": "Travel-Geo",
    "country": "Travel-Geo",
    "food": "Food-Drinks",
    "video_game": "Video-Games",
    "animal": "Pets-Animals",
}

_YES_TOKENS = {"yes", "yeah", "yep", "yup", "sure", "definitely", "absolutely", "okay", "ok"}
_NO_TOKENS = {"no", "nope", "nah", "not", "never", "don't", "dont"}
_QUESTION_LEADS = {
    "what", "who", "where", "when", "why", "how", "which",
    "do", "does", "did", "is", "are", "can", "could", "would", "will",
}
_TOPIC_SWITCH_PHRASES = (
    ("lets", "talk", "about"),
    ("let's", "talk", "about"),
    ("can", "we", "talk", "about"),
    ("talk", "about", "something", "else"),
    ("change", "the", "subject"),
    ("something", "else"),
    ("new", "topic"),
)
_YES_NO_QUESTION_CUES = (
    ("are", "you"), ("do", "you"), ("did", "you"), ("have", "you"), ("has", "it"),
    ("is", "it"), ("is", "your"), ("was", "it"), ("was", "your"), ("would", "you"),
    ("could", "you"), ("will", "you"), ("can", "you"), ("is", "there"),
)
_AUX_LEADS = {"are", "is", "was", "were", "do", "does", "did", "have", "has", "had",
              "would", "could", "will", "can", "should"}


def _contains_phrase(tokens: tuple[str, ...], phrase: tuple[str, ...]) -> bool:
    span = len(phrase)
    return any(tokens[i:i + span] == phrase for i in range(len(tokens) - span + 1))


_WH_LEADS = {"what", "who", "where", "when", "why", "how", "which"}


def is_yes_no_question(text: str) -> bool:
    tokens = normalize_phrase(text)
    if not tokens:
        return False
    if tokens[0] in _WH_LEADS:
        return False
    if tokens[0] in _AUX_LEADS:
        return True
    return any(_contains_phrase(tokens, cue) for cue in _YES_NO_QUESTION_CUES)


@dataclass
class PipelineContext:
    """What round-2 extractors may know beyond the utterance itself."""

    history: list[tuple[str, str]] = field(default_factory=list)
    prev_topics: LabelDistribution | None = None
    prev_intents: LabelDistribution | None = None

    def last_system_utterance(self) -> str | None:
        for speaker, text in reversed(self.history):
            if speaker == "system":
                return text
        return None


class BaseClassifier(Protocol):
    def classify(self, u: TokenizedUtterance, ctx: PipelineContext) -> LabelDistribution: ...


class Expert(Protocol):
    expert_id: str

    def evaluate(
        self, u: TokenizedUtterance, round_one: FeatureBundle, ctx: PipelineContext
    ) -> ExpertOutput | None: ...


class KeywordTopicClassifier:
    """Counts topic keyword hits; empty distribution when nothing matches."""

    def __init__(self, keywords: dict[str, tuple[str, ...]] | None = None):
        self.keywords = keywords if keywords is not None else TOPIC_KEYWORDS

    def classify(self, u: TokenizedUtterance, ctx: PipelineContext) -> LabelDistribution:
        scores: dict[str, float] = {}
        token_set = set(u.tokens)
        for topic, words in self.keywords.items():
            hits = sum(1 for w in words if w in token_set)
            if hits:
                scores[topic] = float(hits)
        total = sum(scores.values())
        if not total:
            return LabelDistribution({})
        return LabelDistribution({t: s / total for t, s in scores.items()})


class RuleIntentClassifier:
    """Single-cue intent detection smeared into a full distribution.

    The detected label gets `peak` probability and the remainder spreads
    uniformly over the other labels, mirroring how an upstream statistical
    classifier rarely answers with certainty.
    """

    def __init__(self, peak: float = 0.7):
        self.peak = peak

    def _detect(self, tokens: tuple[str, ...]) -> str:
        if any(_contains_phrase(tokens, p) for p in _TOPIC_SWITCH_PHRASES):
            return "Topic-Switching"
        if any(t in _NO_TOKENS for t in tokens):
            return "No-Answer"
        if any(t in _YES_TOKENS for t in tokens):
            return "Yes-Answers"
        if tokens and tokens[0] in _QUESTION_LEADS:
            return "Question"
        return "Statement"

    def classify(self, u: TokenizedUtterance, ctx: PipelineContext) -> LabelDistribution:
        if not u.tokens:
            return LabelDistribution({})
        top = self._detect(u.tokens)
        rest = (1.0 - self.peak) / (len(INTENT_LABELS) - 1)
        return LabelDistribution(
            {label: (self.peak if label == top else rest) for label in INTENT_LABELS}
        )


class ContextRejectExpert:
    """Distinguishes "disagreeing with the question" from "changing the topic".

    Fires only when the previous system utterance was a yes/no question and the
    user is pushing back on it.
    """

    expert_id = "context-reject"

    def __init__(self, confidence: float = 0.9):
        self.confidence = confidence

    def evaluate(self, u, round_one, ctx):
        prev = ctx.last_system_utterance()
        if prev is None or not is_yes_no_question(prev):
            return None
        if not any(t in _NO_TOKENS for t in u.tokens):
            return None
        return ExpertOutput(
            self.expert_id,
            LabelDistribution({"Reject": 0.6, "No-Answer": 0.4}),
            self.confidence,
        )


class ContextAffirmExpert:
    """Reads bare agreement after a yes/no question as an answer, not chatter."""

    expert_id = "context-affirm"

    def __init__(self, confidence: float = 0.9):
        self.confidence = confidence

    def evaluate(self, u, round_one, ctx):
        prev = ctx.last_system_utterance()
        if prev is None or not is_yes_no_question(prev):
            return None
        if not any(t in _YES_TOKENS for t in u.tokens):
            return None
        if any(t in _NO_TOKENS for t in u.tokens):
            return None
        return ExpertOutput(
            self.expert_id, LabelDistribution({"Yes-Answers": 1.0}), self.confidence
        )


class EntityTypeTopicExpert:
    """Votes for topics implied by round-1 entity types."""

    expert_id = "entity-topics"

    def __init__(self, confidence: float = 0.9, type_topics: dict[str, str] | None = None):
        self.confidence = confidence
        self.type_topics = type_topics if type_topics is not None else ENTITY_TYPE_TOPICS

    def evaluate(self, u, round_one, ctx):
        votes: dict[str, float] = {}
        for mention in round_one.entities:
            topic = self.type_topics.get(mention.entity_type)
            if topic:
                votes[topic] = votes.get(topic, 0.0) + 1.0
        if not votes:
            return None
        total = sum(votes.values())
        return ExpertOutput(
            self.expert_id,
            LabelDistribution({t: v / total for t, v in votes.items()}),
            self.confidence,
        )


class QaClient(Protocol):
    def ask(self, utterance: str) -> str | None: ...


class CannedQaClient:
    """Offline stand-in for the external QA service: canned answers by question."""

    def __init__(self, answers: dict[str, str] | None = None):
        self._answers = {
            " ".join(normalize_phrase(q)): a for q, a in (answers or {}).items()
        }

    def ask(self, utterance: str) -> str | None:
        return self._answers.get(" ".join(normalize_phrase(utterance)))


DEFAULT_CANNED_ANSWERS = {
    "what is the capital of france": "The capital of France is Paris.",
    "who wrote romeo and juliet": "Romeo and Juliet was written by William Shakespeare.",
    "how many days are in a week": "There are seven days in a week.",
}
