"""Mixture-of-experts combination of label distributions."""

from __future__ import annotations

from dataclasses import dataclass

from ..core import LabelDistribution

DEFAULT_MIX = 0.5


@dataclass
class ExpertOutput:
    expert_id: str
    labels: LabelDistribution
    confidence: float

    def __post_init__(self):
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence out of range: {self.confidence}")


def moe_combine(
    base: LabelDistribution,
    experts: list[ExpertOutput],
    mix: float = DEFAULT_MIX,
) -> LabelDistribution:
    """Blend a base distribution with confidence-weighted expert averages.

    final(l) = normalize((1 - mix) * base(l) + mix * mean_e(conf_e * expert_e(l)))

    With no experts the base is returned unchanged, so the base classifier's
    answer is authoritative when nothing specializes it.
    """
    if not (0.0 <= mix <= 1.0):
        raise ValueError(f"mix out of range: {mix}")
    if not experts:
        return LabelDistribution(dict(base.probs))

    labels: set[str] = set(base.probs)
    for expert in experts:
        labels.update(expert.labels.probs)

    raw: dict[str, float] = {}
    for label in labels:
        expert_term = sum(e.confidence * e.labels.get(label) for e in experts) / len(experts)
        raw[label] = (1.0 - mix) * base.get(label) + mix * expert_term

    total = sum(raw.values())
    if total <= 0.0:
        return LabelDistribution({})
    return LabelDistribution({label: value / total for label, value in raw.items()})
