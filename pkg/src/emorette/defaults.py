"""Loaders for the packaged demo resources: ontology, lexicons, flows, blocklist."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .core import normalize_phrase
from .nlp import (
    CannedQaClient,
    ContextAffirmExpert,
    ContextRejectExpert,
    DEFAULT_CANNED_ANSWERS,
    EntityIndex,
    EntityTypeTopicExpert,
    NlpPipeline,
    SentimentLexicon,
    load_entity_index,
    load_lexicon,
)
from .ontology import Ontology, load_ontology


def data_dir() -> Path:
    return Path(str(resources.files("emorette").joinpath("data")))


def packaged_ontology() -> Ontology:
    return load_ontology((data_dir() / "demo.onto").read_text(encoding="utf-8"))


def packaged_lexicon() -> SentimentLexicon:
    return load_lexicon((data_dir() / "sentiment.lex").read_text(encoding="utf-8"))


def packaged_entity_index() -> EntityIndex:
    return load_entity_index(
        (data_dir() / "entities.tsv").read_text(encoding="utf-8"), source_tag="demo"
    )


def packaged_blocklist() -> frozenset[str]:
    return load_blocklist((data_dir() / "profanity.txt").read_text(encoding="utf-8"))


def load_blocklist(source: str) -> frozenset[str]:
    tokens: set[str] = set()
    for line in source.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tokens.update(normalize_phrase(line))
    return frozenset(tokens)


def packaged_flow_dir() -> Path:
    return data_dir() / "flows"


def packaged_flow_files() -> list[tuple[str, str]]:
    return [
        (p.name, p.read_text(encoding="utf-8"))
        for p in sorted(packaged_flow_dir().glob("*.flow"))
    ]


def packaged_script_path() -> Path:
    return data_dir() / "table1.script"


def standard_pipeline(
    lexicon: SentimentLexicon | None = None,
    entity_index: EntityIndex | None = None,
) -> NlpPipeline:
    """The shipped pipeline wiring: rule classifiers plus the context and
    entity-type experts."""
    return NlpPipeline(
        lexicon=lexicon if lexicon is not None else packaged_lexicon(),
        entity_index=entity_index if entity_index is not None else packaged_entity_index(),
        qa=CannedQaClient(DEFAULT_CANNED_ANSWERS),
        topic_experts=[EntityTypeTopicExpert()],
        intent_experts=[ContextRejectExpert(), ContextAffirmExpert()],
    )
