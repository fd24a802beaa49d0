"""Emorette: a state-machine socialbot engine with ontology-backed pattern NLU,
a two-round NLP feature pipeline, persistence, and conversation analytics."""

from .core import (
    EntityMention,
    FeatureBundle,
    LabelDistribution,
    SessionState,
    StackEntry,
    TokenizedUtterance,
    UNSET,
    VariableTable,
    normalize_utterance,
)
from .engine import (
    DialogueGraph,
    State,
    Transition,
    TurnRng,
    emit_response,
    run_turn,
    stack_return,
    take_system_turn,
    take_user_turn,
    tick_lives,
)
from .flows import Diagnostic, FlowError, lint_files, lint_flow, load_flow_dir, load_flows
from .ontology import Ontology, OntologyError, descendants, load_ontology, nodes_for_phrase
from .patterns import Binding, PatternSyntaxError, match, parse_pattern, unparse
from .service import ChatService, build_service

__version__ = "0.1.0"

__all__ = [
    "Binding",
    "ChatService",
    "Diagnostic",
    "DialogueGraph",
    "EntityMention",
    "FeatureBundle",
    "FlowError",
    "LabelDistribution",
    "Ontology",
    "OntologyError",
    "PatternSyntaxError",
    "SessionState",
    "StackEntry",
    "State",
    "TokenizedUtterance",
    "Transition",
    "TurnRng",
    "UNSET",
    "VariableTable",
    "build_service",
    "descendants",
    "emit_response",
    "lint_files",
    "lint_flow",
    "load_flow_dir",
    "load_flows",
    "load_ontology",
    "match",
    "nodes_for_phrase",
    "normalize_utterance",
    "parse_pattern",
    "run_turn",
    "stack_return",
    "take_system_turn",
    "take_user_turn",
    "tick_lives",
    "unparse",
]
