"""Flow authoring format: JSON documents describing states, transitions,
globals, and fallback pools, merged into a DialogueGraph, plus the linter.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .engine import (
    CaptureRef,
    ClassifierRef,
    DEFAULT_LIFE,
    DialogueGraph,
    Guard,
    PUSH_HERE,
    StackOp,
    State,
    Transition,
    template_slots,
)
from .ontology import Ontology
from .patterns import PatternSyntaxError, ont_refs, parse_pattern, unparse


class FlowError(ValueError):
    def __init__(self, message: str, code: str = "bad-schema", location: str = ""):
        super().__init__(message)
        self.code = code
        self.location = location


@dataclass
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str
    location: str = ""

    def __str__(self) -> str:
        where = f" [{self.location}]" if self.location else ""
        return f"{self.severity}: {self.code}: {self.message}{where}"


def _as_files(files: Sequence[tuple[str, str]] | Sequence[str]) -> list[tuple[str, str]]:
    out = []
    for i, item in enumerate(files):
        if isinstance(item, tuple):
            out.append(item)
        else:
            out.append((f"flow[{i}]", item))
    return out


def _parse_guards(raw, where: str) -> list[Guard]:
    if raw is None:
        return []
    if not isinstance(raw, list):
        raise FlowError(f"{where}: guards must be an array", location=where)
    guards = []
    for item in raw:
        if not isinstance(item, dict) or "var" not in item:
            raise FlowError(f"{where}: each guard needs a 'var'", location=where)
        var = item["var"]
        if "eq" in item:
            guards.append(Guard(var, "eq", item["eq"]))
        elif item.get("set") is True:
            guards.append(Guard(var, "set"))
        elif item.get("set") is False:
            guards.append(Guard(var, "unset"))
        else:
            raise FlowError(f"{where}: guard needs 'eq' or 'set'", location=where)
    return guards


def _parse_sets(raw, where: str) -> dict:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise FlowError(f"{where}: sets must be an object", location=where)
    sets = {}
    for var, value in raw.items():
        if isinstance(value, str) and value.startswith("$"):
            sets[var] = CaptureRef(value[1:])
        else:
            sets[var] = value
    return sets


def _parse_stack(raw, where: str) -> StackOp | None:
    if raw is None:
        return None
    if raw == "pop":
        return StackOp("pop")
    if isinstance(raw, dict) and "push" in raw:
        life = raw.get("life", DEFAULT_LIFE)
        if not isinstance(life, int) or life < 0:
            raise FlowError(f"{where}: push life must be a non-negative integer", location=where)
        return StackOp("push", raw["push"], life)
    raise FlowError(f"{where}: stack must be \"pop\" or {{\"push\": ..., \"life\": ...}}", location=where)


def _parse_nlu(raw, where: str, ont: Ontology | None):
    if raw is None:
        return None, None
    if isinstance(raw, str):
        try:
            expr = parse_pattern(raw)
        except PatternSyntaxError as exc:
            raise FlowError(f"{where}: bad pattern: {exc}", code="bad-nlu", location=where) from exc
        for node in ont_refs(expr):
            if ont is None or not ont.has_node(node):
                raise FlowError(
                    f"{where}: pattern references unknown ontology node {node!r}",
                    code="unknown-ont-node",
                    location=where,
                )
        return expr, raw
    if isinstance(raw, dict) and "classifier" in raw:
        kind = raw["classifier"]
        if kind in ("intent", "topic"):
            if not raw.get("label"):
                raise FlowError(f"{where}: {kind} classifier needs a label", code="bad-nlu", location=where)
            return ClassifierRef(kind, label=raw["label"], min_prob=float(raw.get("min_prob", 0.5))), None
        if kind == "sentiment":
            polarity = raw.get("polarity")
            if polarity not in ("positive", "negative"):
                raise FlowError(
                    f"{where}: sentiment classifier needs polarity positive|negative",
                    code="bad-nlu",
                    location=where,
                )
            return ClassifierRef(kind, polarity=polarity, min_abs=float(raw.get("min_abs", 0.05))), None
        raise FlowError(f"{where}: unknown classifier kind {kind!r}", code="bad-nlu", location=where)
    raise FlowError(f"{where}: nlu must be a pattern string or classifier object", code="bad-nlu", location=where)


def load_flows(
    files: Sequence[tuple[str, str]] | Sequence[str],
    ont: Ontology | None = None,
    *,
    initial: str | None = None,
    name: str = "",
) -> DialogueGraph:
    """Merge flow files into one validated graph.

    Duplicate state or transition ids across files are errors; fallback pools
    with the same id are concatenated; globals are unioned. Exactly one file
    may declare `initial` unless an override is passed.
    """
    named = _as_files(files)
    states: dict[str, State] = {}
    transitions: dict[str, Transition] = {}
    global_ids: list[str] = []
    pools: dict[str, list[str]] = {}
    persistent: set[str] = set()
    declared_initial: str | None = None
    graph_name = name

    docs = []
    for fname, text in named:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FlowError(f"{fname}: parse error at line {exc.lineno}: {exc.msg}", code="parse-error") from exc
        if not isinstance(doc, dict):
            raise FlowError(f"{fname}: flow document must be an object", code="parse-error")
        docs.append((fname, doc))

    for fname, doc in docs:
        component = doc.get("component", "")
        if doc.get("initial") and not name:
            # The entry flow names the merged graph unless the caller overrode it.
            graph_name = doc.get("name", "") or graph_name
        elif not graph_name:
            graph_name = doc.get("name", "")
        for state_id, spec in (doc.get("states") or {}).items():
            if state_id in states:
                raise FlowError(
                    f"{fname}: duplicate state id {state_id!r}", code="duplicate-id", location=state_id
                )
            kind = spec.get("kind")
            if kind not in ("user", "system"):
                raise FlowError(
                    f"{fname}: state {state_id!r} kind must be user|system", location=state_id
                )
            states[state_id] = State(
                id=state_id,
                kind=kind,
                complete=bool(spec.get("complete", False)),
                component=spec.get("component", component),
            )
        for var in doc.get("persistent") or []:
            persistent.add(str(var).lower())
        if doc.get("initial"):
            if declared_initial is not None:
                raise FlowError(
                    f"{fname}: initial state declared by more than one flow", code="multiple-initials"
                )
            declared_initial = doc["initial"]
        for pool_id, lines in (doc.get("fallbacks") or {}).items():
            pools.setdefault(pool_id, []).extend(str(s) for s in lines)

    for fname, doc in docs:
        flow_label = doc.get("name") or fname
        for index, t_raw in enumerate(doc.get("transitions") or []):
            tid = t_raw.get("id") or f"{flow_label}.t{index}"
            where = f"{fname}:{tid}"
            if tid in transitions:
                raise FlowError(f"{where}: duplicate transition id", code="duplicate-id", location=tid)
            from_state = t_raw.get("from")
            to_state = t_raw.get("to")
            if from_state != "*" and from_state not in states:
                raise FlowError(
                    f"{where}: unknown source state {from_state!r}", code="unknown-state", location=tid
                )
            if to_state not in states:
                raise FlowError(
                    f"{where}: unknown target state {to_state!r}", code="unknown-state", location=tid
                )
            kind = "user" if from_state == "*" else states[from_state].kind
            nlu, nlu_source = _parse_nlu(t_raw.get("nlu"), where, ont)
            if kind == "user" and nlu is None:
                raise FlowError(f"{where}: user transition needs nlu", code="bad-nlu", location=tid)
            if kind == "system" and nlu is not None:
                raise FlowError(f"{where}: system transition cannot have nlu", code="bad-nlu", location=tid)
            stack_op = _parse_stack(t_raw.get("stack"), where)
            if stack_op and stack_op.kind == "push" and stack_op.target != PUSH_HERE:
                if stack_op.target not in states:
                    raise FlowError(
                        f"{where}: push target {stack_op.target!r} does not exist",
                        code="unknown-state",
                        location=tid,
                    )
            transitions[tid] = Transition(
                id=tid,
                from_state=from_state,
                to_state=to_state,
                kind=kind,
                nlu=nlu,
                nlu_source=nlu_source,
                template=t_raw.get("template"),
                guards=_parse_guards(t_raw.get("guards"), where),
                sets=_parse_sets(t_raw.get("sets"), where),
                stack_op=stack_op,
                priority=int(t_raw.get("priority", 0)),
                weight=float(t_raw.get("weight", 1.0)),
                chain=bool(t_raw.get("chain", False)),
                source_file=fname,
            )
        for gid in doc.get("globals") or []:
            global_ids.append(gid)

    for gid in global_ids:
        if gid not in transitions:
            raise FlowError(f"globals reference unknown transition {gid!r}", code="unknown-state", location=gid)
        if transitions[gid].kind != "user":
            raise FlowError(f"global transition {gid!r} must be user kind", location=gid)

    chosen_initial = initial or declared_initial
    if chosen_initial is None:
        raise FlowError("no initial state declared by any flow", code="no-initial")
    if chosen_initial not in states:
        raise FlowError(f"initial state {chosen_initial!r} does not exist", code="unknown-state")

    graph = DialogueGraph(
        name=graph_name or "flows",
        states=states,
        transitions=transitions,
        initial_state=chosen_initial,
        global_ids=global_ids,
        fallback_pools=pools,
        persistent_vars=persistent,
    )
    graph.finalize()
    return graph


def load_flow_dir(path: str | Path, ont: Ontology | None = None, **kwargs) -> DialogueGraph:
    path = Path(path)
    files = sorted(path.glob("*.flow"))
    if not files:
        raise FlowError(f"no .flow files in {path}")
    return load_flows([(f.name, f.read_text(encoding="utf-8")) for f in files], ont, **kwargs)


# --- linting -----------------------------------------------------------------


def _reachable_states(graph: DialogueGraph, *, ignore_pushes: bool = False) -> set[str]:
    seen: set[str] = set()
    frontier = [graph.initial_state]
    globals_applied = False
    while frontier:
        state_id = frontier.pop()
        if state_id in seen or state_id not in graph.states:
            continue
        seen.add(state_id)
        for t in graph.outgoing(state_id):
            if ignore_pushes and t.stack_op and t.stack_op.kind == "push":
                continue
            frontier.append(t.to_state)
            if t.stack_op and t.stack_op.kind == "push" and t.stack_op.target != PUSH_HERE:
                frontier.append(t.stack_op.target)
        if not globals_applied and graph.states[state_id].kind == "user":
            globals_applied = True
            for t in graph.globals_ordered():
                if ignore_pushes and t.stack_op and t.stack_op.kind == "push":
                    continue
                frontier.append(t.to_state)
                if t.stack_op and t.stack_op.kind == "push" and t.stack_op.target != PUSH_HERE:
                    frontier.append(t.stack_op.target)
    return seen


def lint_flow(graph: DialogueGraph) -> list[Diagnostic]:
    """Static checks over a loaded graph; diagnostics, never exceptions."""
    out: list[Diagnostic] = []

    reachable = _reachable_states(graph)
    for state_id in sorted(graph.states):
        if state_id not in reachable:
            out.append(Diagnostic("warning", "unreachable-state", f"state {state_id!r} is unreachable", state_id))

    for state_id, state in sorted(graph.states.items()):
        if state.kind == "user" and not any(t.kind == "user" for t in graph.outgoing(state_id)):
            out.append(
                Diagnostic("error", "user-dead-end", f"user state {state_id!r} has no outgoing transitions", state_id)
            )

    # A slot is fine if something anywhere can set it, the transition sets it
    # itself, or a guard forces it present.
    settable: set[str] = set()
    for t in graph.transitions.values():
        settable.update(k.lower() for k in t.sets)
    for t in sorted(graph.transitions.values(), key=lambda t: t.id):
        if not t.template:
            continue
        own_sets = {k.lower() for k in t.sets}
        guarded = {g.var.lower() for g in t.guards if g.op in ("set", "eq")}
        for slot in sorted(template_slots(t.template)):
            slot_l = slot.lower()
            if slot_l not in settable and slot_l not in own_sets and slot_l not in guarded:
                out.append(
                    Diagnostic(
                        "error",
                        "unguarded-slot",
                        f"template slot ${slot} on {t.id!r} is never set and not guarded",
                        t.id,
                    )
                )

    pushless = _reachable_states(graph, ignore_pushes=True)
    any_user_pushless = any(graph.states[s].kind == "user" for s in pushless)
    for t in sorted(graph.transitions.values(), key=lambda t: t.id):
        if not (t.stack_op and t.stack_op.kind == "pop"):
            continue
        from_pushless = t.from_state in pushless or (t.from_state == "*" and any_user_pushless)
        if from_pushless:
            out.append(
                Diagnostic(
                    "warning",
                    "possibly-empty-pop",
                    f"pop on {t.id!r} is reachable along a path with no pushes",
                    t.id,
                )
            )

    for t in sorted(graph.transitions.values(), key=lambda t: t.id):
        to_kind = graph.states[t.to_state].kind
        if t.kind == "user" and to_kind != "system":
            out.append(
                Diagnostic(
                    "error", "alternation", f"user transition {t.id!r} must land on a system state", t.id
                )
            )
        if t.kind == "system" and to_kind == "system" and not t.chain:
            out.append(
                Diagnostic(
                    "error",
                    "alternation",
                    f"system transition {t.id!r} targets a system state without the chain marker",
                    t.id,
                )
            )

    return out


def lint_files(
    files: Sequence[tuple[str, str]] | Sequence[str],
    ont: Ontology | None = None,
    **kwargs,
) -> tuple[DialogueGraph | None, list[Diagnostic]]:
    """Lint driver: loading problems become diagnostics instead of exceptions."""
    try:
        graph = load_flows(files, ont, **kwargs)
    except FlowError as exc:
        return None, [Diagnostic("error", exc.code, str(exc), exc.location)]
    return graph, lint_flow(graph)


# --- normalization / round-trip ----------------------------------------------


def graph_to_document(graph: DialogueGraph) -> dict:
    """Normalized single-document form of a graph; loading it back is identity."""
    transitions = []
    for t in graph.transitions.values():
        entry: dict = {"id": t.id, "from": t.from_state, "to": t.to_state}
        if t.nlu_source is not None:
            entry["nlu"] = unparse(parse_pattern(t.nlu_source))
        elif isinstance(t.nlu, ClassifierRef):
            ref: dict = {"classifier": t.nlu.classifier}
            if t.nlu.label is not None:
                ref["label"] = t.nlu.label
                ref["min_prob"] = t.nlu.min_prob
            if t.nlu.polarity is not None:
                ref["polarity"] = t.nlu.polarity
                ref["min_abs"] = t.nlu.min_abs
            entry["nlu"] = ref
        if t.template is not None:
            entry["template"] = t.template
        if t.guards:
            entry["guards"] = [
                {"var": g.var, "eq": g.value} if g.op == "eq" else {"var": g.var, "set": g.op == "set"}
                for g in t.guards
            ]
        if t.sets:
            entry["sets"] = {
                k: (f"${v.name}" if isinstance(v, CaptureRef) else v) for k, v in t.sets.items()
            }
        if t.stack_op:
            if t.stack_op.kind == "pop":
                entry["stack"] = "pop"
            else:
                entry["stack"] = {"push": t.stack_op.target, "life": t.stack_op.life}
        if t.priority:
            entry["priority"] = t.priority
        if t.weight != 1.0:
            entry["weight"] = t.weight
        if t.chain:
            entry["chain"] = True
        transitions.append(entry)

    states = {}
    for state_id in sorted(graph.states):
        s = graph.states[state_id]
        entry = {"kind": s.kind}
        if s.complete:
            entry["complete"] = True
        if s.component:
            entry["component"] = s.component
        states[state_id] = entry

    return {
        "name": graph.name,
        "component": "",
        "initial": graph.initial_state,
        "persistent": sorted(graph.persistent_vars),
        "states": states,
        "transitions": transitions,
        "globals": list(graph.global_ids),
        "fallbacks": {k: list(v) for k, v in sorted(graph.fallback_pools.items())},
    }
