from .entities import EntityIndex, link_entities, load_entity_index
from .experts import (
    CannedQaClient,
    ContextAffirmExpert,
    ContextRejectExpert,
    DEFAULT_CANNED_ANSWERS,
    EntityTypeTopicExpert,
    KeywordTopicClassifier,
    PipelineContext,
    QaClient,
    RuleIntentClassifier,
    is_yes_no_question,
)
from .moe import DEFAULT_MIX, ExpertOutput, moe_combine
from .pipeline import NlpPipeline, run_pipeline
from .sentiment import SentimentLexicon, load_lexicon, score_sentiment

__all__ = [
    "CannedQaClient",
    "ContextAffirmExpert",
    "ContextRejectExpert",
    "DEFAULT_CANNED_ANSWERS",
    "DEFAULT_MIX",
    "EntityIndex",
    "EntityTypeTopicExpert",
    "ExpertOutput",
    "KeywordTopicClassifier",
    "NlpPipeline",
    "PipelineContext",
    "QaClient",
    "RuleIntentClassifier",
    "SentimentLexicon",
    "is_yes_no_question",
    "link_entities",
    "load_entity_index",
    "load_lexicon",
    "moe_combine",
    "run_pipeline",
    "score_sentiment",
]
