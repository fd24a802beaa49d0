"""Pattern mini-language for transition NLU.

Grammar:

    expr := term { WS term }                      sequence, gaps allowed between terms
    term := WORD                                  one normalized token
          | "_"                                   any one token
          | "{" expr { "," expr } "}"             alternatives
          | "#ONT(" NODE ")"                      any phrase under an ontology node
          | "$" VAR "=" term                      capture the matched surface into VAR

A pattern matches if its token sequence occurs in order anywhere in the
utterance. The winning match is the leftmost one; ties prefer the smallest
final token index, then the earliest-listed alternative, then the earliest
token positions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

from .core import TokenizedUtterance, is_identifier, normalize_phrase
from .ontology import Ontology, descendants, nodes_for_phrase


class PatternSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownOntologyNodeError(ValueError):
    """Configuration error: a pattern references a node the ontology does not have."""


@dataclass(frozen=True)
class Word:
    token: str


@dataclass(frozen=True)
class Wildcard:
    pass


@dataclass(frozen=True)
class Seq:
    parts: tuple["PatternExpr", ...]


@dataclass(frozen=True)
class AnyOf:
    # Alternatives keep authoring order; earlier ones win exact-span ties.
    options: tuple["PatternExpr", ...]


@dataclass(frozen=True)
class OntRef:
    node: str


@dataclass(frozen=True)
class Capture:
    var: str
    expr: "PatternExpr"


PatternExpr = Union[Word, Wildcard, Seq, AnyOf, OntRef, Capture]


@dataclass(frozen=True)
class Binding:
    surface: str
    node: str | None = None


Bindings = dict[str, Binding]


# --- parsing ---------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str) -> PatternSyntaxError:
        return PatternSyntaxError(message, self.pos)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def parse_expr(self, stop: str = "") -> PatternExpr:
        parts = [self.parse_term()]
        while True:
            self.skip_ws()
            ch = self.peek()
            if not ch or ch in stop:
                break
            parts.append(self.parse_term())
        return parts[0] if len(parts) == 1 else Seq(tuple(parts))

    def parse_term(self) -> PatternExpr:
        self.skip_ws()
        ch = self.peek()
        if not ch:
            raise self.error("expected a pattern term")
        if ch == "_":
            self.pos += 1
            return Wildcard()
        if ch == "{":
            return self.parse_group()
        if ch == "#":
            return self.parse_ont_ref()
        if ch == "$":
            return self.parse_capture()
        if ch.isalnum() or ch == "'":
            return self.parse_word()
        raise self.error(f"unexpected character {ch!r}")

    def parse_group(self) -> PatternExpr:
        open_pos = self.pos
        self.pos += 1  # consume "{"
        self.skip_ws()
        if not self.peek():
            self.pos = open_pos
            raise self.error("unclosed brace")
        options = [self.parse_expr(stop=",}")]
        while True:
            self.skip_ws()
            ch = self.peek()
            if ch == ",":
                self.pos += 1
                options.append(self.parse_expr(stop=",}"))
            elif ch == "}":
                self.pos += 1
                break
            else:
                self.pos = open_pos
                raise self.error("unclosed brace")
        return options[0] if len(options) == 1 else AnyOf(tuple(options))

    def parse_ont_ref(self) -> OntRef:
        if not self.text.startswith("#ONT(", self.pos):
            raise self.error("expected #ONT(node)")
        start = self.pos + len("#ONT(")
        close = self.text.find(")", start)
        if close < 0:
            raise self.error("unterminated #ONT(")
        node = self.text[start:close].strip()
        if not node:
            self.pos = start
            raise self.error("empty ontology reference")
        self.pos = close + 1
        return OntRef(node)

    def parse_capture(self) -> Capture:
        self.pos += 1  # consume "$"
        start = self.pos
        while self.peek().isalnum() or self.peek() == "_":
            self.pos += 1
        var = self.text[start:self.pos]
        if not is_identifier(var):
            self.pos = start
            raise self.error("invalid capture variable name")
        if self.peek() != "=":
            raise self.error("expected '=' after capture variable")
        self.pos += 1
        return Capture(var, self.parse_term())

    def parse_word(self) -> Word:
        start = self.pos
        while self.peek().isalnum() or self.peek() == "'":
            self.pos += 1
        raw = self.text[start:self.pos]
        tokens = normalize_phrase(raw)
        if len(tokens) != 1:
            self.pos = start
            raise self.error(f"word {raw!r} does not normalize to one token")
        return Word(tokens[0])


def parse_pattern(text: str) -> PatternExpr:
    parser = _Parser(text)
    parser.skip_ws()
    if not parser.peek():
        raise parser.error("empty pattern")
    expr = parser.parse_expr()
    parser.skip_ws()
    if parser.peek():
        raise parser.error(f"unexpected character {parser.peek()!r}")
    return expr


def unparse(expr: PatternExpr) -> str:
    if isinstance(expr, Word):
        return expr.token
    if isinstance(expr, Wildcard):
        return "_"
    if isinstance(expr, Seq):
        return " ".join(unparse(p) for p in expr.parts)
    if isinstance(expr, AnyOf):
        return "{" + ", ".join(unparse(o) for o in expr.options) + "}"
    if isinstance(expr, OntRef):
        return f"#ONT({expr.node})"
    if isinstance(expr, Capture):
        return f"${expr.var}={unparse(expr.expr)}"
    raise TypeError(f"not a pattern expression: {expr!r}")


def ont_refs(expr: PatternExpr) -> Iterator[str]:
    """All ontology nodes a pattern can reach, for static checking."""
    if isinstance(expr, OntRef):
        yield expr.node
    elif isinstance(expr, Seq):
        for part in expr.parts:
            yield from ont_refs(part)
    elif isinstance(expr, AnyOf):
        for option in expr.options:
            yield from ont_refs(option)
    elif isinstance(expr, Capture):
        yield from ont_refs(expr.expr)


def capture_names(expr: PatternExpr) -> Iterator[str]:
    if isinstance(expr, Capture):
        yield expr.var
        yield from capture_names(expr.expr)
    elif isinstance(expr, Seq):
        for part in expr.parts:
            yield from capture_names(part)
    elif isinstance(expr, AnyOf):
        for option in expr.options:
            yield from capture_names(option)


# --- matching --------------------------------------------------------------


@dataclass(frozen=True)
class _Match:
    first: int
    last: int  # exclusive
    path: tuple[int, ...]  # AnyOf choices in pre-order of the chosen parse
    atoms: tuple[int, ...]  # interleaved (start, end) per consumed atom
    pairs: tuple[tuple[str, str, str | None], ...]  # (var, surface, node)
    node: str | None

    def key(self) -> tuple:
        return (self.first, self.last, self.path, self.atoms)


def _require_ontology(expr: PatternExpr, ont: Ontology | None) -> None:
    for node in ont_refs(expr):
        if ont is None:
            raise UnknownOntologyNodeError(f"pattern references {node!r} but no ontology is bound")
        if not ont.has_node(node):
            raise UnknownOntologyNodeError(f"pattern references unknown ontology node {node!r}")


def _iter_matches(
    expr: PatternExpr, u: TokenizedUtterance, ont: Ontology | None, lo: int
) -> Iterator[_Match]:
    n = len(u.tokens)
    if isinstance(expr, Word):
        for i in range(lo, n):
            if u.tokens[i] == expr.token:
                yield _Match(i, i + 1, (), (i, i + 1), (), None)
    elif isinstance(expr, Wildcard):
        for i in range(lo, n):
            yield _Match(i, i + 1, (), (i, i + 1), (), None)
    elif isinstance(expr, OntRef):
        assert ont is not None
        allowed = descendants(ont, expr.node)
        for i in range(lo, n):
            for j in range(i + 1, min(n, i + ont.max_terminal_len) + 1):
                hits = nodes_for_phrase(ont, u.tokens[i:j]) & allowed
                if hits:
                    yield _Match(i, j, (), (i, j), (), min(hits))
    elif isinstance(expr, Seq):
        yield from _iter_seq(expr.parts, u, ont, lo)
    elif isinstance(expr, AnyOf):
        for idx, option in enumerate(expr.options):
            for m in _iter_matches(option, u, ont, lo):
                yield _Match(m.first, m.last, (idx,) + m.path, m.atoms, m.pairs, m.node)
    elif isinstance(expr, Capture):
        for m in _iter_matches(expr.expr, u, ont, lo):
            surface = " ".join(u.tokens[m.first:m.last])
            pairs = m.pairs + ((expr.var, surface, m.node),)
            yield _Match(m.first, m.last, m.path, m.atoms, pairs, m.node)
    else:
        raise TypeError(f"not a pattern expression: {expr!r}")


def _iter_seq(
    parts: tuple[PatternExpr, ...], u: TokenizedUtterance, ont: Ontology | None, lo: int
) -> Iterator[_Match]:
    head, rest = parts[0], parts[1:]
    for m_head in _iter_matches(head, u, ont, lo):
        if not rest:
            yield m_head
            continue
        for m_rest in _iter_seq(rest, u, ont, m_head.last):
            yield _Match(
                m_head.first,
                m_rest.last,
                m_head.path + m_rest.path,
                m_head.atoms + m_rest.atoms,
                m_head.pairs + m_rest.pairs,
                None,
            )


def find_match(
    expr: PatternExpr, u: TokenizedUtterance, ont: Ontology | None = None
) -> tuple[int, int, Bindings] | None:
    """Best match with its token span: (first, last, bindings), or None."""
    _require_ontology(expr, ont)
    best: _Match | None = None
    for m in _iter_matches(expr, u, ont, 0):
        if best is None or m.key() < best.key():
            best = m
    if best is None:
        return None
    bindings = {var: Binding(surface, node) for var, surface, node in best.pairs}
    return best.first, best.last, bindings


def match(
    expr: PatternExpr, u: TokenizedUtterance, ont: Ontology | None = None
) -> Bindings | None:
    """Best match of a compiled pattern against an utterance, or None.

    Returns {} for a capture-free match, so callers can tell "matched, nothing
    tagged" apart from "no match".
    """
    found = find_match(expr, u, ont)
    return None if found is None else found[2]
