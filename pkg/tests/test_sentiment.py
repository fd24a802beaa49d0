from __future__ import annotations

import math
import random

import pytest

from emorette.core import normalize_utterance
from emorette.nlp.sentiment import (
    LexiconError,
    SentimentLexicon,
    load_lexicon,
    score_sentiment,
)


def compound(total: float) -> float:
    return total / math.sqrt(total * total + 15.0)


def test_empty_utterance_is_neutral(lexicon):
    assert score_sentiment(lexicon, normalize_utterance("")) == 0.0


def test_i_love_it(lexicon):
    score = score_sentiment(lexicon, normalize_utterance("i love it"))
    assert score == pytest.approx(0.637, abs=1e-3)


def test_negation_example(lexicon):
    score = score_sentiment(lexicon, normalize_utterance("i do not love it"))
    assert score == pytest.approx(-0.522, abs=1e-3)


def test_negator_window_is_three_tokens(lexicon):
    inside = score_sentiment(lexicon, normalize_utterance("not a b love"))
    outside = score_sentiment(lexicon, normalize_utterance("not a b c love"))
    assert inside < 0
    assert outside > 0


def test_booster_applies_only_immediately_before(lexicon):
    base = score_sentiment(lexicon, normalize_utterance("love"))
    boosted = score_sentiment(lexicon, normalize_utterance("really love"))
    separated = score_sentiment(lexicon, normalize_utterance("really x love"))
    assert boosted > base
    assert separated == pytest.approx(base)


def test_booster_pushes_negative_down(lexicon):
    base = score_sentiment(lexicon, normalize_utterance("bad"))
    boosted = score_sentiment(lexicon, normalize_utterance("really bad"))
    assert boosted < base < 0


def test_unknown_tokens_ignored(lexicon):
    assert score_sentiment(lexicon, normalize_utterance("zyx qwv")) == 0.0


def test_score_clamped_to_unit_interval():
    lex = SentimentLexicon(valences={f"w{i}": 4.0 for i in range(40)})
    text = " ".join(f"w{i}" for i in range(40))
    assert score_sentiment(lex, normalize_utterance(text)) <= 1.0


def test_load_lexicon_parses_directives():
    lex = load_lexicon("good\t1.5\nbad\t-2.0\n!negator not\n!booster very 0.293\n")
    assert lex.valences == {"good": 1.5, "bad": -2.0}
    assert lex.negators == {"not"}
    assert lex.boosters == {"very": 0.293}


def test_load_lexicon_rejects_out_of_range():
    with pytest.raises(LexiconError):
        load_lexicon("great\t4.5\n")


def test_load_lexicon_rejects_negator_booster_overlap():
    with pytest.raises(LexiconError):
        load_lexicon("!negator very\n!booster very 0.2\n")


def test_load_lexicon_bad_lines():
    with pytest.raises(LexiconError):
        load_lexicon("good 1.5\n")  # space, not tab
    with pytest.raises(LexiconError):
        load_lexicon("!booster very\n")


def _random_case(rng: random.Random):
    valence = rng.choice([v / 10 for v in range(-40, 41) if v != 0])
    lex = SentimentLexicon(
        valences={"target": valence},
        negators={"noway"},
        boosters={"boost": 0.293},
    )
    filler = [f"f{rng.randint(0, 9)}" for _ in range(rng.randint(0, 4))]
    return lex, valence, filler


def test_negation_flips_sign_on_randomized_cases():
    rng = random.Random(2024)
    for _ in range(100):
        lex, valence, filler = _random_case(rng)
        plain = filler + ["target"]
        offset = rng.randint(1, 3)
        position = max(0, len(plain) - 1 - offset + 1)
        negated = plain[:position] + ["noway"] + plain[position:]
        base = score_sentiment(lex, normalize_utterance(" ".join(plain)))
        flipped = score_sentiment(lex, normalize_utterance(" ".join(negated)))
        assert base != 0
        assert (base > 0) != (flipped > 0), (plain, negated)


def test_booster_monotonicity_on_randomized_cases():
    rng = random.Random(77)
    for _ in range(100):
        lex, valence, filler = _random_case(rng)
        if valence < 0:
            valence = -valence
            lex.valences["target"] = valence
        plain = filler + ["target"]
        boosted = plain[:-1] + ["boost", "target"]
        base = score_sentiment(lex, normalize_utterance(" ".join(plain)))
        more = score_sentiment(lex, normalize_utterance(" ".join(boosted)))
        assert more > base, (plain, boosted)
