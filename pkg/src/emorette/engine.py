"""State-machine dialogue manager: turn execution, transition selection,
templated generation, global transitions, and the life-counted state stack.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field

from .core import (
    UNSET,
    FeatureBundle,
    SessionState,
    StackEntry,
    TokenizedUtterance,
    Value,
    VariableTable,
)
from .ontology import Ontology
from .patterns import Bindings, PatternExpr, match

DEFAULT_LIFE = 10
CHAIN_LIMIT = 25
PUSH_HERE = "$HERE"
GENERIC_POOL = "generic"
# Last resort when a graph ships no generic pool at all.
BUILTIN_FALLBACK = "Let's talk about something else. What have you been up to lately?"

_SLOT_RE = re.compile(r"\$([A-Za-z_][A-Za-z0-9_]*)")


class EngineError(RuntimeError):
    """Configuration-level failure during turn execution (not a user-input issue)."""


@dataclass
class State:
    id: str
    kind: str  # "user" | "system"
    complete: bool = False
    component: str = ""


@dataclass
class Guard:
    var: str
    op: str  # "set" | "unset" | "eq"
    value: Value | None = None

    def holds(self, variables: VariableTable) -> bool:
        current = variables.get(self.var)
        if self.op == "set":
            return current is not UNSET
        if self.op == "unset":
            return current is UNSET
        if self.op == "eq":
            if current is UNSET:
                return False
            if isinstance(current, bool) != isinstance(self.value, bool):
                return False
            return current == self.value
        raise EngineError(f"unknown guard op {self.op!r}")


@dataclass
class StackOp:
    kind: str  # "push" | "pop"
    target: str | None = None  # push only; PUSH_HERE pushes the departed state
    life: int = DEFAULT_LIFE


@dataclass
class ClassifierRef:
    classifier: str  # "intent" | "topic" | "sentiment"
    label: str | None = None
    min_prob: float = 0.5
    polarity: str | None = None  # sentiment only: "positive" | "negative"
    min_abs: float = 0.05


@dataclass(frozen=True)
class CaptureRef:
    name: str


@dataclass
class Transition:
    id: str
    from_state: str
    to_state: str
    kind: str  # "user" | "system"
    nlu: PatternExpr | ClassifierRef | None = None
    nlu_source: str | None = None
    template: str | None = None
    guards: list[Guard] = field(default_factory=list)
    sets: dict[str, Value | CaptureRef] = field(default_factory=dict)
    stack_op: StackOp | None = None
    priority: int = 0
    weight: float = 1.0
    chain: bool = False
    source_file: str = ""


@dataclass
class DialogueGraph:
    name: str
    states: dict[str, State]
    transitions: dict[str, Transition]
    initial_state: str
    global_ids: list[str] = field(default_factory=list)
    fallback_pools: dict[str, list[str]] = field(default_factory=dict)
    persistent_vars: set[str] = field(default_factory=set)
    _outgoing: dict[str, list[Transition]] = field(default_factory=dict, repr=False)

    def finalize(self) -> None:
        """Precompute priority-ordered outgoing lists (authored order breaks ties)."""
        self._outgoing = {state_id: [] for state_id in self.states}
        order = {tid: i for i, tid in enumerate(self.transitions)}
        for t in self.transitions.values():
            if t.from_state in self._outgoing:
                self._outgoing[t.from_state].append(t)
        for bucket in self._outgoing.values():
            bucket.sort(key=lambda t: (-t.priority, order[t.id]))

    def outgoing(self, state_id: str) -> list[Transition]:
        return self._outgoing.get(state_id, [])

    def globals_ordered(self) -> list[Transition]:
        order = {tid: i for i, tid in enumerate(self.transitions)}
        ts = [self.transitions[tid] for tid in self.global_ids]
        ts.sort(key=lambda t: (-t.priority, order[t.id]))
        return ts


class TurnRng:
    """Deterministic per-turn random source.

    Each draw is derived from (seed, turn_index, draw counter) through SHA-256,
    so replays are identical across processes and restarts with no carried RNG
    state to persist.
    """

    def __init__(self, seed: int, turn_index: int):
        self.seed = seed
        self.turn_index = turn_index
        self.counter = 0

    def random(self) -> float:
        material = f"{self.seed}:{self.turn_index}:{self.counter}".encode()
        self.counter += 1
        digest = hashlib.sha256(material).digest()
        return int.from_bytes(digest[:8], "big") / 2.0**64

    def choice(self, items: list[str]) -> str:
        if not items:
            raise EngineError("choice from empty pool")
        return items[int(self.random() * len(items)) % len(items)]

    def weighted(self, transitions: list[Transition]) -> Transition:
        total = sum(t.weight for t in transitions)
        point = self.random() * total
        acc = 0.0
        for t in transitions:
            acc += t.weight
            if point < acc:
                return t
        return transitions[-1]


# --- templates ---------------------------------------------------------------


def template_slots(template: str) -> set[str]:
    return set(_SLOT_RE.findall(template))


def _render_value(value: Value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value)


def render_template(template: str, variables: VariableTable) -> str:
    def substitute(m: re.Match) -> str:
        value = variables.get(m.group(1))
        if value is UNSET:
            raise EngineError(f"unresolved template slot ${m.group(1)}")
        return _render_value(value)

    return _SLOT_RE.sub(substitute, template)


def slots_resolvable(template: str, variables: VariableTable, sets: dict | None = None) -> bool:
    pending = {k.lower() for k, v in (sets or {}).items() if not isinstance(v, CaptureRef)}
    for slot in template_slots(template):
        if slot.lower() not in pending and not variables.has(slot):
            return False
    return True


def guards_hold(t: Transition, variables: VariableTable) -> bool:
    return all(g.holds(variables) for g in t.guards)


# --- stack ops ---------------------------------------------------------------


def stack_return(graph: DialogueGraph, session: SessionState) -> str | None:
    """Pop to the most recent entry still alive; expired entries are dropped."""
    while session.stack:
        entry = session.stack.pop()
        if entry.life > 0:
            return entry.state_id
    return None


def tick_lives(session: SessionState) -> SessionState:
    for entry in session.stack:
        entry.life = max(0, entry.life - 1)
    return session


def _enter_state(graph: DialogueGraph, session: SessionState, state_id: str) -> None:
    state = graph.states.get(state_id)
    if state is None:
        raise EngineError(f"transition into unknown state {state_id!r}")
    session.current_state = state_id
    if state.component:
        session.components_visited.add(state.component)


def _apply_sets(
    variables: VariableTable, sets: dict[str, Value | CaptureRef], bindings: Bindings
) -> list[str]:
    problems = []
    lowered = {name.lower(): b for name, b in bindings.items()}
    for var, value in sets.items():
        if isinstance(value, CaptureRef):
            binding = bindings.get(value.name) or lowered.get(value.name.lower())
            if binding is None:
                problems.append(f"capture ${value.name} not bound; {var} left unset")
                continue
            variables.set(var, binding.surface)
        else:
            variables.set(var, value)
    return problems


def _apply_transition(
    graph: DialogueGraph, session: SessionState, t: Transition, bindings: Bindings
) -> list[str]:
    problems = _apply_sets(session.variables, t.sets, bindings)
    origin = session.current_state
    if t.stack_op and t.stack_op.kind == "push":
        target = origin if t.stack_op.target == PUSH_HERE else t.stack_op.target
        if target not in graph.states:
            raise EngineError(f"push target {target!r} does not exist")
        session.stack.append(StackEntry(target, t.stack_op.life))
        _enter_state(graph, session, t.to_state)
    elif t.stack_op and t.stack_op.kind == "pop":
        returned = stack_return(graph, session)
        _enter_state(graph, session, returned if returned is not None else t.to_state)
    else:
        _enter_state(graph, session, t.to_state)
    return problems


# --- user turn ---------------------------------------------------------------


def nlu_matches(
    t: Transition,
    u: TokenizedUtterance,
    features: FeatureBundle,
    ont: Ontology | None,
) -> Bindings | None:
    """None when the transition's classifier rejects the utterance; bindings otherwise."""
    nlu = t.nlu
    if nlu is None:
        return None
    if isinstance(nlu, ClassifierRef):
        if nlu.classifier == "intent":
            dist = features.intent_dist
            if dist is not None and nlu.label and dist.get(nlu.label) >= nlu.min_prob:
                return {}
            return None
        if nlu.classifier == "topic":
            dist = features.topic_dist
            if dist is not None and nlu.label and dist.get(nlu.label) >= nlu.min_prob:
                return {}
            return None
        if nlu.classifier == "sentiment":
            score = features.sentiment
            if score is None or abs(score) < nlu.min_abs:
                return None
            if nlu.polarity == "positive" and score > 0:
                return {}
            if nlu.polarity == "negative" and score < 0:
                return {}
            return None
        raise EngineError(f"malformed classifier reference on transition {t.id!r}")
    return match(nlu, u, ont)


@dataclass
class UserTurnResult:
    transition: Transition | None  # None => unmatched
    bindings: Bindings
    via_global: bool = False
    problems: list[str] = field(default_factory=list)


def take_user_turn(
    graph: DialogueGraph,
    session: SessionState,
    u: TokenizedUtterance,
    features: FeatureBundle,
    ont: Ontology | None = None,
) -> tuple[SessionState, UserTurnResult]:
    """Pick and apply the winning user transition: locals by descending priority
    first, then globals; no winner leaves the session unchanged and flags the
    turn unmatched for the fallback path."""
    state = graph.states[session.current_state]
    if state.kind != "user":
        raise EngineError(f"take_user_turn in non-user state {state.id!r}")

    local = [t for t in graph.outgoing(state.id) if t.kind == "user"]
    seen = {t.id for t in local}
    for t in local:
        if not guards_hold(t, session.variables):
            continue
        bindings = nlu_matches(t, u, features, ont)
        if bindings is not None:
            session.retry_count = 0
            problems = _apply_transition(graph, session, t, bindings)
            return session, UserTurnResult(t, bindings, False, problems)

    for t in graph.globals_ordered():
        if t.id in seen:
            continue
        if not guards_hold(t, session.variables):
            continue
        bindings = nlu_matches(t, u, features, ont)
        if bindings is not None:
            session.retry_count = 0
            problems = _apply_transition(graph, session, t, bindings)
            return session, UserTurnResult(t, bindings, True, problems)

    return session, UserTurnResult(None, {})


# --- system turn -------------------------------------------------------------


def take_system_turn(
    graph: DialogueGraph, session: SessionState, rng: TurnRng
) -> tuple[SessionState, str, list[str]]:
    """Chain system states into one response: at each system state pick the
    highest-priority valid transition (weighted draw on ties), render its
    template, and continue until a user state is reached. Completion-marked
    states divert to the stack's newest live entry first."""
    segments: list[str] = []
    taken: list[str] = []
    for _ in range(CHAIN_LIMIT):
        state = graph.states[session.current_state]
        if state.kind != "system":
            break
        if state.complete:
            returned = stack_return(graph, session)
            if returned is not None:
                _enter_state(graph, session, returned)
                continue

        valid = []
        for t in graph.outgoing(state.id):
            if t.kind != "system":
                continue
            if not guards_hold(t, session.variables):
                continue
            if t.template is not None and not slots_resolvable(
                t.template, session.variables, t.sets
            ):
                continue
            valid.append(t)
        if not valid:
            break

        top = valid[0].priority
        pool = [t for t in valid if t.priority == top]
        chosen = pool[0] if len(pool) == 1 else rng.weighted(pool)

        _apply_sets(session.variables, chosen.sets, {})
        if chosen.template is not None:
            segments.append(render_template(chosen.template, session.variables))
        taken.append(chosen.id)

        if chosen.stack_op and chosen.stack_op.kind == "push":
            target = (
                state.id if chosen.stack_op.target == PUSH_HERE else chosen.stack_op.target
            )
            session.stack.append(StackEntry(target, chosen.stack_op.life))
            _enter_state(graph, session, chosen.to_state)
        elif chosen.stack_op and chosen.stack_op.kind == "pop":
            returned = stack_return(graph, session)
            _enter_state(graph, session, returned if returned is not None else chosen.to_state)
        else:
            _enter_state(graph, session, chosen.to_state)

    return session, " ".join(segments), taken


# --- response filtering and fallback ------------------------------------------


def _fallback_pool(graph: DialogueGraph, component: str) -> list[str]:
    pool = graph.fallback_pools.get(component) if component else None
    if not pool:
        pool = graph.fallback_pools.get(GENERIC_POOL)
    return pool if pool else [BUILTIN_FALLBACK]


def emit_response(
    graph: DialogueGraph,
    candidate: str,
    rng: TurnRng,
    blocklist: frozenset[str] | set[str] = frozenset(),
    component: str = "",
) -> str:
    """Pass a clean candidate through; replace a blocked one with a seeded draw
    from the active component's fallback pool (generic pool otherwise)."""
    from .core import normalize_utterance

    tokens = normalize_utterance(candidate).tokens
    if any(token in blocklist for token in tokens):
        return rng.choice(_fallback_pool(graph, component))
    return candidate


# --- full turn ---------------------------------------------------------------


@dataclass
class TurnOutcome:
    response: str
    user_transition: str | None
    system_transitions: list[str]
    unmatched: bool = False
    used_fallback: bool = False
    problems: list[str] = field(default_factory=list)


def _lowest_priority_default(graph: DialogueGraph, state_id: str) -> Transition | None:
    candidates = [t for t in graph.outgoing(state_id) if t.kind == "user"]
    if not candidates:
        return None
    return min(candidates, key=lambda t: t.priority)


def run_turn(
    graph: DialogueGraph,
    session: SessionState,
    utterance: TokenizedUtterance,
    features: FeatureBundle,
    ont: Ontology | None = None,
    blocklist: frozenset[str] | set[str] = frozenset(),
) -> TurnOutcome:
    """One complete user turn: user transition, system chain, profanity filter,
    life tick. Always produces a nonempty response."""
    rng = TurnRng(session.rng_seed, session.turn_index)
    session.history.append(("user", utterance.raw))

    session, result = take_user_turn(graph, session, utterance, features, ont)
    outcome = TurnOutcome(
        response="",
        user_transition=result.transition.id if result.transition else None,
        system_transitions=[],
        unmatched=result.transition is None,
        problems=list(result.problems),
    )

    if result.transition is None:
        if session.retry_count < 1:
            # First miss: acknowledge from the generic pool and hold the state.
            session.retry_count += 1
            outcome.used_fallback = True
            outcome.response = rng.choice(_fallback_pool(graph, ""))
            _finish_turn(session, outcome.response)
            return outcome
        session.retry_count = 0
        default = _lowest_priority_default(graph, session.current_state)
        if default is None:
            outcome.used_fallback = True
            outcome.response = rng.choice(_fallback_pool(graph, ""))
            _finish_turn(session, outcome.response)
            return outcome
        outcome.problems += _apply_transition(graph, session, default, {})
        outcome.user_transition = default.id

    session, text, taken = take_system_turn(graph, session, rng)
    outcome.system_transitions = taken

    component = graph.states[session.current_state].component
    if not text:
        outcome.used_fallback = True
        text = rng.choice(_fallback_pool(graph, component))
    outcome.response = emit_response(graph, text, rng, blocklist, component)
    _finish_turn(session, outcome.response)
    return outcome


def _finish_turn(session: SessionState, response: str) -> None:
    session.history.append(("system", response))
    tick_lives(session)
    session.turn_index += 1
