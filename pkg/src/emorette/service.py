"""Turn orchestration shared by the HTTP server and the CLI.

ChatService owns the immutable artifacts (graph, ontology, pipeline) and a
store; it serializes turns per session and persists a snapshot after every
completed turn, so the last durable snapshot is always authoritative.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from datetime import date as date_type
from datetime import datetime, timedelta, timezone
from pathlib import Path

from .analytics import ConversationRecord, record_to_dict
from .core import EntityMention, SessionState, normalize_utterance
from .defaults import (
    packaged_blocklist,
    packaged_flow_dir,
    packaged_ontology,
    standard_pipeline,
)
from .engine import DialogueGraph, TurnRng, emit_response, run_turn, take_system_turn
from .flows import load_flow_dir
from .nlp import NlpPipeline, PipelineContext
from .ontology import Ontology
from .persistence import MemoryStore, Store

logger = logging.getLogger(__name__)

OPENING_TURN_INDEX = -1  # rng namespace for the pre-first-turn system opening
DEFAULT_IDLE_TIMEOUT_MINUTES = 30.0


class ConversationEndedError(RuntimeError):
    """The session idled past the rating window; it no longer accepts a rating."""


@dataclass
class ChatResult:
    response: str
    session_id: str
    turn_index: int
    debug: dict | None = None


@dataclass
class ChatService:
    graph: DialogueGraph
    ontology: Ontology
    pipeline: NlpPipeline
    store: Store
    seed: int = 0
    blocklist: frozenset[str] = frozenset()
    variant: str | None = None
    # A conversation ends for analytics when rated or after this much idle
    # time; None disables the window.
    idle_timeout_minutes: float | None = DEFAULT_IDLE_TIMEOUT_MINUTES
    _locks: dict[str, threading.Lock] = field(default_factory=dict, repr=False)
    _locks_guard: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def _session_lock(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(session_id, threading.Lock())

    def _create_session(self, session_id: str) -> SessionState:
        session = SessionState(
            session_id=session_id,
            current_state=self.graph.initial_state,
            rng_seed=self.seed,
        )
        state = self.graph.states[session.current_state]
        if state.component:
            session.components_visited.add(state.component)
        if state.kind == "system":
            # Speak the opening before the first user turn.
            rng = TurnRng(session.rng_seed, OPENING_TURN_INDEX)
            session, text, _ = take_system_turn(self.graph, session, rng)
            if text:
                opening = emit_response(
                    self.graph, text, rng, self.blocklist,
                    self.graph.states[session.current_state].component,
                )
                session.history.append(("system", opening))
        self.store.save_turn(session_id, session)
        return session

    def chat(
        self,
        session_id: str,
        utterance: str,
        user_id: str | None = None,
        debug: bool = False,
    ) -> ChatResult:
        if not utterance or not utterance.strip():
            raise ValueError("utterance must be nonempty")
        with self._session_lock(session_id):
            session = self.store.load_latest(session_id)
            if session is None:
                session = self._create_session(session_id)

            tokens = normalize_utterance(utterance)
            ctx = PipelineContext(history=list(session.history))
            features = self.pipeline.run(tokens, ctx)
            outcome = run_turn(
                self.graph, session, tokens, features, self.ontology, self.blocklist
            )
            self.store.save_turn(session_id, session)

            if user_id and self.graph.persistent_vars:
                attrs = {
                    name: value
                    for name, value in session.variables.as_dict().items()
                    if name in self.graph.persistent_vars
                }
                if attrs:
                    self.store.merge_user_attributes(user_id, attrs)

            debug_block = None
            if debug:
                debug_block = self._debug_block(session, features, outcome)
            return ChatResult(outcome.response, session_id, session.turn_index, debug_block)

    @staticmethod
    def _mention_dict(m: EntityMention) -> dict:
        return {
            "surface": m.surface,
            "start": m.start,
            "end": m.end,
            "entity_id": m.entity_id,
            "entity_type": m.entity_type,
        }

    def _debug_block(self, session: SessionState, features, outcome) -> dict:
        return {
            "state": session.current_state,
            "variables": session.variables.as_dict(),
            "stack": [
                {"state": e.state_id, "life": e.life} for e in reversed(session.stack)
            ],
            "features": {
                "sentiment": features.sentiment,
                "entities": [self._mention_dict(m) for m in features.entities],
                "topic_dist": dict(features.topic_dist.probs) if features.topic_dist else None,
                "intent_dist": dict(features.intent_dist.probs) if features.intent_dist else None,
                "qa_answer": features.qa_answer,
                "diagnostics": list(features.diagnostics),
            },
            "chosen_transitions": {
                "user": outcome.user_transition,
                "system": list(outcome.system_transitions),
            },
            "components": sorted(session.components_visited),
            "unmatched": outcome.unmatched,
            "used_fallback": outcome.used_fallback,
            "history": [[speaker, text] for speaker, text in session.history],
        }

    def rate(self, session_id: str, rating: float, user_id: str | None = None) -> ConversationRecord:
        if not isinstance(rating, (int, float)) or isinstance(rating, bool):
            raise ValueError("rating must be a number")
        if not (1 <= rating <= 5):
            raise ValueError(f"rating out of range: {rating}")
        with self._session_lock(session_id):
            session = self.store.load_latest(session_id)
            if session is None:
                raise KeyError(f"unknown session {session_id!r}")
            if self.idle_timeout_minutes is not None:
                last = self.store.last_saved_at(session_id)
                age = datetime.now(timezone.utc) - last if last else timedelta(0)
                if age > timedelta(minutes=self.idle_timeout_minutes):
                    raise ConversationEndedError(
                        f"session {session_id!r} idled past the rating window"
                    )
            record = ConversationRecord(
                conversation_id=session_id,
                user_id=user_id or "",
                rating=float(rating),
                turn_count=session.turn_index,
                components=set(session.components_visited),
                variant=self.variant,
                date=date_type.today().isoformat(),
            )
            self.store.append_rating(record_to_dict(record))
            return record

    def ensure_session(self, session_id: str) -> str | None:
        """Create the session if needed and return its opening utterance."""
        with self._session_lock(session_id):
            session = self.store.load_latest(session_id)
            if session is None:
                session = self._create_session(session_id)
        for speaker, text in session.history:
            if speaker == "system":
                return text
        return None

    def opening(self, session_id: str) -> str | None:
        """First system utterance of a session, if it has begun."""
        session = self.store.load_latest(session_id)
        if session is None:
            return None
        for speaker, text in session.history:
            if speaker == "system":
                return text
        return None

    def health(self) -> dict:
        return {
            "status": "ok",
            "graph_name": self.graph.name,
            "state_count": len(self.graph.states),
        }


def build_service(
    flow_dir: str | Path | None = None,
    store: Store | None = None,
    seed: int = 0,
    variant: str | None = None,
    ontology: Ontology | None = None,
    pipeline: NlpPipeline | None = None,
    blocklist: frozenset[str] | None = None,
) -> ChatService:
    """Assemble a service from packaged defaults, overridable piecewise."""
    ont = ontology if ontology is not None else packaged_ontology()
    graph = load_flow_dir(flow_dir if flow_dir is not None else packaged_flow_dir(), ont)
    return ChatService(
        graph=graph,
        ontology=ont,
        pipeline=pipeline if pipeline is not None else standard_pipeline(),
        store=store if store is not None else MemoryStore(),
        seed=seed,
        blocklist=blocklist if blocklist is not None else packaged_blocklist(),
        variant=variant,
    )
