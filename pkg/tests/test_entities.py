from __future__ import annotations

import random
import time

import pytest

from emorette.core import normalize_utterance
from emorette.nlp.entities import EntityIndex, link_entities, load_entity_index

from oracles import brute_force_link


def test_empty_utterance(entity_index):
    assert link_entities(entity_index, normalize_utterance("")) == []


def test_toy_story_span(entity_index):
    mentions = link_entities(entity_index, normalize_utterance("tell me about toy story"))
    assert len(mentions) == 1
    mention = mentions[0]
    assert (mention.start, mention.end) == (3, 5)
    assert mention.surface == "toy story"
    assert mention.entity_type == "movie"


def test_longest_match_wins(entity_index):
    mentions = link_entities(entity_index, normalize_utterance("i flew to new york city"))
    assert [m.surface for m in mentions] == ["new york city"]
    assert mentions[0].entity_id == "city:new_york_city"


def test_non_overlapping_sorted(entity_index):
    mentions = link_entities(
        entity_index, normalize_utterance("we watched toy story in new york and ate pizza")
    )
    surfaces = [m.surface for m in mentions]
    assert surfaces == ["toy story", "new york", "pizza"]
    for a, b in zip(mentions, mentions[1:]):
        assert a.end <= b.start


def test_load_rejects_malformed_line():
    with pytest.raises(ValueError):
        load_entity_index("only two\tfields\n")


def test_load_later_duplicate_wins():
    idx = load_entity_index("paris\tcity:paris\tcity\nparis\tperson:paris\tperson\n")
    assert idx.phrases[("paris",)] == ("person:paris", "person")


def test_lookup_is_normalized():
    idx = load_entity_index("New York\tcity:new_york\tcity\n")
    mentions = link_entities(idx, normalize_utterance("NEW YORK!"))
    assert len(mentions) == 1


def test_ngram_cap_respected():
    idx = EntityIndex(phrases={("a", "b", "c"): ("x", "t")}, max_ngram=2)
    assert link_entities(idx, normalize_utterance("a b c")) == []


def test_matches_brute_force_on_random_cases():
    rng = random.Random(909)
    vocabulary = [f"w{i}" for i in range(12)]
    for _ in range(300):
        phrases = {}
        for _ in range(rng.randint(1, 40)):
            size = rng.randint(1, 4)
            phrase = tuple(rng.choice(vocabulary) for _ in range(size))
            phrases[phrase] = (f"id{len(phrases)}", "t")
        idx = EntityIndex(phrases=phrases, max_ngram=5)
        tokens = tuple(rng.choice(vocabulary) for _ in range(rng.randint(0, 12)))
        utterance = normalize_utterance(" ".join(tokens))
        actual = [(m.start, m.end, m.entity_id, m.entity_type) for m in link_entities(idx, utterance)]
        assert actual == brute_force_link(phrases, tokens, 5)


def test_load_scales_linearly():
    lines = [f"phrase {i} x\tid{i}\ttype" for i in range(50_000)]
    started = time.time()
    idx = load_entity_index("\n".join(lines))
    elapsed = time.time() - started
    assert idx.size == 50_000
    assert elapsed < 5.0
