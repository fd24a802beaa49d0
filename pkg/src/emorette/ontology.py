"""Concept ontology: a DAG of nodes with lexical terminals, queried by hyponym closure.

File format (line oriented, UTF-8, `#` comments):

    node <id>
    edge <parent> <child>
    term <node> <phrase...>
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import normalize_phrase


class OntologyError(ValueError):
    """Raised for structural problems in an ontology file (cycles, bad references)."""


@dataclass
class Ontology:
    nodes: set[str] = field(default_factory=set)
    children: dict[str, set[str]] = field(default_factory=dict)
    terminals: dict[str, set[tuple[str, ...]]] = field(default_factory=dict)
    # Derived at load: node -> reflexive-transitive closure, phrase -> nodes.
    _closure: dict[str, frozenset[str]] = field(default_factory=dict, repr=False)
    _phrase_index: dict[tuple[str, ...], set[str]] = field(default_factory=dict, repr=False)
    max_terminal_len: int = 0

    def has_node(self, node: str) -> bool:
        return node in self.nodes


def _check_acyclic(nodes: set[str], children: dict[str, set[str]]) -> None:
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {n: WHITE for n in nodes}
    for root in sorted(nodes):
        if color[root] != WHITE:
            continue
        stack: list[tuple[str, bool]] = [(root, False)]
        while stack:
            node, done = stack.pop()
            if done:
                color[node] = BLACK
                continue
            if color[node] != WHITE:
                continue
            color[node] = GRAY
            stack.append((node, True))
            for child in children.get(node, ()):
                if color[child] == GRAY:
                    raise OntologyError(f"cycle detected through node {child!r}")
                if color[child] == WHITE:
                    stack.append((child, False))


def _compute_closures(nodes: set[str], children: dict[str, set[str]]) -> dict[str, frozenset[str]]:
    closure: dict[str, frozenset[str]] = {}

    def visit(node: str) -> frozenset[str]:
        cached = closure.get(node)
        if cached is not None:
            return cached
        acc = {node}
        for child in children.get(node, ()):
            acc |= visit(child)
        result = frozenset(acc)
        closure[node] = result
        return result

    for node in nodes:
        visit(node)
    return closure


def load_ontology(source: str) -> Ontology:
    """Parse and validate an ontology file; the result is immutable and shareable."""
    nodes: set[str] = set()
    edges: list[tuple[str, str, int]] = []
    terms: list[tuple[str, str, int]] = []

    for lineno, raw_line in enumerate(source.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "node":
            if len(parts) != 2:
                raise OntologyError(f"line {lineno}: expected 'node <id>'")
            node_id = parts[1]
            if node_id in nodes:
                raise OntologyError(f"line {lineno}: duplicate node id {node_id!r}")
            nodes.add(node_id)
        elif kind == "edge":
            if len(parts) != 3:
                raise OntologyError(f"line {lineno}: expected 'edge <parent> <child>'")
            edges.append((parts[1], parts[2], lineno))
        elif kind == "term":
            if len(parts) < 3:
                raise OntologyError(f"line {lineno}: expected 'term <node> <phrase...>'")
            terms.append((parts[1], " ".join(parts[2:]), lineno))
        else:
            raise OntologyError(f"line {lineno}: unknown declaration {kind!r}")

    children: dict[str, set[str]] = {}
    for parent, child, lineno in edges:
        for endpoint in (parent, child):
            if endpoint not in nodes:
                raise OntologyError(f"line {lineno}: edge references unknown node {endpoint!r}")
        if parent == child:
            raise OntologyError(f"cycle detected through node {parent!r}")
        children.setdefault(parent, set()).add(child)

    _check_acyclic(nodes, children)

    terminals: dict[str, set[tuple[str, ...]]] = {}
    phrase_index: dict[tuple[str, ...], set[str]] = {}
    max_len = 0
    for node, phrase, lineno in terms:
        if node not in nodes:
            raise OntologyError(f"line {lineno}: term references unknown node {node!r}")
        tokens = normalize_phrase(phrase)
        if not tokens:
            raise OntologyError(f"line {lineno}: terminal {phrase!r} is empty after normalization")
        terminals.setdefault(node, set()).add(tokens)
        phrase_index.setdefault(tokens, set()).add(node)
        max_len = max(max_len, len(tokens))

    ont = Ontology(nodes=nodes, children=children, terminals=terminals, max_terminal_len=max_len)
    ont._closure = _compute_closures(nodes, children)
    ont._phrase_index = phrase_index
    return ont


def descendants(ont: Ontology, node: str) -> frozenset[str]:
    """Reflexive-transitive closure over child edges; includes the node itself."""
    if node not in ont.nodes:
        raise OntologyError(f"unknown node {node!r}")
    return ont._closure[node]


def nodes_for_phrase(ont: Ontology, tokens: tuple[str, ...] | list[str]) -> set[str]:
    """All nodes with a terminal equal to the given normalized token sequence."""
    return set(ont._phrase_index.get(tuple(tokens), ()))
