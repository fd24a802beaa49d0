from __future__ import annotations

import pytest

from emorette.core import (
    LabelDistribution,
    UNSET,
    VariableTable,
    normalize_utterance,
)
from emorette.persistence import decode_session, encode_session
from emorette.core import SessionState, StackEntry


def test_tokenize_lowercases():
    assert normalize_utterance("Not really").tokens == ("not", "really")


def test_tokenize_empty():
    assert normalize_utterance("").tokens == ()


def test_tokenize_strips_punctuation_keeps_inner_apostrophe():
    assert normalize_utterance("I don't love it!").tokens == ("i", "don't", "love", "it")


def test_tokenize_outer_apostrophes_dropped():
    assert normalize_utterance("'hello' ''there''").tokens == ("hello", "there")


def test_tokenize_curly_apostrophe():
    assert normalize_utterance("don’t").tokens == ("don't",)


def test_tokenize_punctuation_only():
    assert normalize_utterance("?!... --- ''").tokens == ()


def test_variable_table_overwrites_and_reports_unset():
    table = VariableTable()
    assert table.get("student") is UNSET
    table.set("student", True)
    table.set("STUDENT", False)
    assert table.get("student") is False
    assert len(table) == 1


def test_variable_table_case_insensitive_lookup():
    table = VariableTable({"RELATED_PERSON": "friend"})
    assert table.get("related_person") == "friend"
    assert table.has("Related_Person")


def test_variable_table_rejects_bad_names():
    table = VariableTable()
    with pytest.raises(ValueError):
        table.set("9lives", 1)
    with pytest.raises(ValueError):
        table.set("", 1)
    with pytest.raises(TypeError):
        table.set("x", [1, 2])  # type: ignore[arg-type]


def test_variable_values_keep_types_through_snapshot():
    session = SessionState(
        session_id="s",
        current_state="a",
        variables=VariableTable({"student": True, "activity": "talk_to_mom", "count": 3, "score": 1.5}),
        stack=[StackEntry("b", 4)],
        turn_index=2,
        rng_seed=99,
        history=[("user", "hi"), ("system", "hello")],
    )
    restored = decode_session(encode_session(session))
    assert restored == session
    values = restored.variables.as_dict()
    assert values["student"] is True
    assert values["count"] == 3 and not isinstance(values["count"], bool)
    assert isinstance(values["score"], float)


def test_stack_entry_rejects_negative_life():
    with pytest.raises(ValueError):
        StackEntry("x", -1)


def test_label_distribution_validates():
    LabelDistribution({"a": 0.25, "b": 0.75}).validate()
    LabelDistribution({}).validate()
    with pytest.raises(ValueError):
        LabelDistribution({"a": 0.5}).validate()
    with pytest.raises(ValueError):
        LabelDistribution({"a": 1.5, "b": -0.5}).validate()


def test_label_distribution_argmax_stable_on_ties():
    dist = LabelDistribution({"b": 0.5, "a": 0.5})
    assert dist.argmax() == "a"
    assert LabelDistribution({}).argmax() is None
