from __future__ import annotations

import random

import pytest

from emorette.core import LabelDistribution
from emorette.nlp.moe import ExpertOutput, moe_combine


def test_identity_without_experts():
    base = LabelDistribution({"Movies": 0.6, "Music": 0.4})
    out = moe_combine(base, [])
    assert out.probs == {"Movies": 0.6, "Music": 0.4}
    assert out is not base  # fresh value, not an alias


def test_identity_on_empty_base():
    assert moe_combine(LabelDistribution({}), []).probs == {}


def test_mixture_example():
    base = LabelDistribution({"Movies": 0.6, "Music": 0.4})
    expert = ExpertOutput("food", LabelDistribution({"Food-Drinks": 1.0}), 1.0)
    out = moe_combine(base, [expert], 0.5)
    assert out.probs["Movies"] == pytest.approx(0.3, abs=1e-9)
    assert out.probs["Music"] == pytest.approx(0.2, abs=1e-9)
    assert out.probs["Food-Drinks"] == pytest.approx(0.5, abs=1e-9)


def test_reject_expert_overrides_argmax():
    base = LabelDistribution(
        {"Topic-Switching": 0.7, "Statement": 0.1, "Question": 0.1, "Yes-Answers": 0.1}
    )
    expert = ExpertOutput("reject", LabelDistribution({"Reject": 1.0}), 0.9)
    out = moe_combine(base, [expert], 0.5)
    assert out.argmax() == "Reject"


def test_confidence_zero_expert_contributes_nothing():
    base = LabelDistribution({"A": 1.0})
    expert = ExpertOutput("silent", LabelDistribution({"B": 1.0}), 0.0)
    out = moe_combine(base, [expert], 0.5)
    assert out.argmax() == "A"
    assert out.probs.get("B", 0.0) == 0.0


def test_expert_only_when_base_empty():
    expert = ExpertOutput("solo", LabelDistribution({"Movies": 1.0}), 0.8)
    out = moe_combine(LabelDistribution({}), [expert], 0.5)
    assert out.argmax() == "Movies"
    assert sum(out.probs.values()) == pytest.approx(1.0, abs=1e-9)


def test_mix_bounds_validated():
    with pytest.raises(ValueError):
        moe_combine(LabelDistribution({}), [], mix=1.5)
    with pytest.raises(ValueError):
        ExpertOutput("x", LabelDistribution({}), confidence=-0.1)


def _random_distribution(rng: random.Random, labels: list[str]) -> LabelDistribution:
    chosen = [l for l in labels if rng.random() < 0.6]
    if not chosen:
        return LabelDistribution({})
    weights = [rng.random() + 1e-6 for _ in chosen]
    total = sum(weights)
    return LabelDistribution({l: w / total for l, w in zip(chosen, weights)})


def test_output_distribution_sums_to_one_on_randomized_inputs():
    rng = random.Random(5150)
    labels = [f"L{i}" for i in range(6)]
    for _ in range(1000):
        base = _random_distribution(rng, labels)
        experts = [
            ExpertOutput(f"e{j}", _random_distribution(rng, labels), rng.random())
            for j in range(rng.randint(0, 4))
        ]
        out = moe_combine(base, experts, rng.random())
        out.validate()
        if out.probs:
            assert sum(out.probs.values()) == pytest.approx(1.0, abs=1e-9)
