"""Two-round feature extraction over a user utterance.

Round 1 runs sentiment, entity linking, and the QA stub; round 2 runs the
topic and intent mixtures, which may read round-1 fields and conversation
context. Within a round, extractors are independent: running them in any order
gives the same bundle. A failing extractor contributes a diagnostic instead of
aborting the turn.
"""

from __future__ import annotations

from typing import Callable, Sequence

from ..core import FeatureBundle, TokenizedUtterance
from .entities import EntityIndex, link_entities
from .experts import (
    BaseClassifier,
    CannedQaClient,
    Expert,
    KeywordTopicClassifier,
    PipelineContext,
    QaClient,
    RuleIntentClassifier,
)
from .moe import DEFAULT_MIX, ExpertOutput, moe_combine
from .sentiment import SentimentLexicon, score_sentiment


class NlpPipeline:
    def __init__(
        self,
        lexicon: SentimentLexicon,
        entity_index: EntityIndex,
        qa: QaClient | None = None,
        base_topic: BaseClassifier | None = None,
        base_intent: BaseClassifier | None = None,
        topic_experts: Sequence[Expert] = (),
        intent_experts: Sequence[Expert] = (),
        mix: float = DEFAULT_MIX,
    ):
        self.lexicon = lexicon
        self.entity_index = entity_index
        self.qa = qa if qa is not None else CannedQaClient()
        self.base_topic = base_topic if base_topic is not None else KeywordTopicClassifier()
        self.base_intent = base_intent if base_intent is not None else RuleIntentClassifier()
        self.topic_experts = list(topic_experts)
        self.intent_experts = list(intent_experts)
        self.mix = mix

    # Round tables map field name -> extractor; order of application is
    # irrelevant by contract, which the tests shuffle to confirm.
    def _round_one(self, u: TokenizedUtterance, ctx: PipelineContext) -> dict[str, Callable]:
        return {
            "sentiment": lambda: score_sentiment(self.lexicon, u),
            "entities": lambda: link_entities(self.entity_index, u),
            "qa_answer": lambda: self.qa.ask(u.raw),
        }

    def _round_two(
        self, u: TokenizedUtterance, ctx: PipelineContext, bundle: FeatureBundle
    ) -> dict[str, Callable]:
        return {
            "topic_dist": lambda: self._mixture(
                self.base_topic, self.topic_experts, u, ctx, bundle
            ),
            "intent_dist": lambda: self._mixture(
                self.base_intent, self.intent_experts, u, ctx, bundle
            ),
        }

    def _mixture(self, base, experts, u, ctx, bundle):
        outputs: list[ExpertOutput] = []
        for expert in experts:
            result = expert.evaluate(u, bundle, ctx)
            if result is not None:
                outputs.append(result)
        return moe_combine(base.classify(u, ctx), outputs, self.mix)

    def run(
        self,
        u: TokenizedUtterance,
        ctx: PipelineContext | None = None,
        order: Sequence[str] | None = None,
    ) -> FeatureBundle:
        ctx = ctx if ctx is not None else PipelineContext()
        bundle = FeatureBundle()
        self._apply(bundle, self._round_one(u, ctx), order)
        self._apply(bundle, self._round_two(u, ctx, bundle), order)
        return bundle

    @staticmethod
    def _apply(bundle: FeatureBundle, extractors: dict[str, Callable], order) -> None:
        names = [n for n in order if n in extractors] if order else list(extractors)
        for name in names:
            try:
                setattr(bundle, name, extractors[name]())
            except Exception as exc:  # isolation: a broken extractor never kills the turn
                bundle.diagnostics.append(f"{name}: {type(exc).__name__}: {exc}")


def run_pipeline(
    pipeline: NlpPipeline, u: TokenizedUtterance, ctx: PipelineContext | None = None
) -> FeatureBundle:
    return pipeline.run(u, ctx)
