"""Script language: set definitions, quantified formulas and queries.

Formula operators, tightest first::

    ! F G N      negation and the unary temporal operators (AX = N, AF = F, AG = G)
    *            conjunction
    +            disjunction
    U            strong until (left associative)
    =>           implication (right associative)

Set expressions (``[SETS]`` right-hand sides and ``elof`` domains) combine
literal sets ``{item, ...}``, named sets, ``~`` complement, ``AND`` and ``OR``.

Commands::

    <formula>
    A s ; <formula>            A s elof <set> ; <formula>
    E s ; <formula>            E s elof <set> ; <formula>
    ? s : <formula>

A trailing ``#`` continues a command on the next line; ``//`` starts a
comment; ``expect TRUE`` / ``expect FALSE`` in front of a command records the
verdict the command is supposed to produce.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Union

from csmverify.reachability import ReachabilityGraph


class ScriptError(Exception):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.message = message
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(where + message)


class ResolveError(Exception):
    """A name in a formula or set expression does not resolve against the graph."""


# -- formula AST ---------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    name: str  # signal name


@dataclass(frozen=True)
class CompAtom:
    automaton: str
    state: str


@dataclass(frozen=True)
class InVar:
    var: str


@dataclass(frozen=True)
class InSet:
    set: "SetExpr"


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class AX:
    arg: "Formula"


@dataclass(frozen=True)
class AF:
    arg: "Formula"


@dataclass(frozen=True)
class AG:
    arg: "Formula"


@dataclass(frozen=True)
class AU:
    left: "Formula"
    right: "Formula"


Formula = Union[Atom, CompAtom, InVar, InSet, Const, Not, And, Or, Implies, AX, AF, AG, AU]

# -- set expressions -----------------------------------------------------------


@dataclass(frozen=True)
class SetLit:
    items: tuple[str, ...]


@dataclass(frozen=True)
class SetRef:
    name: str


@dataclass(frozen=True)
class SetNot:
    arg: "SetExpr"


@dataclass(frozen=True)
class SetAnd:
    left: "SetExpr"
    right: "SetExpr"


@dataclass(frozen=True)
class SetOr:
    left: "SetExpr"
    right: "SetExpr"


SetExpr = Union[SetLit, SetRef, SetNot, SetAnd, SetOr]

# -- commands ------------------------------------------------------------------


@dataclass(frozen=True)
class SetDef:
    name: str
    expr: SetExpr
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Command:
    kind: str  # 'plain', 'forall', 'exists' or 'query'
    body: Formula
    var: str | None = None
    domain: SetExpr | None = None  # None means all states
    expect: bool | None = field(default=None, compare=False)
    source: str = field(default="", compare=False)
    line: int = field(default=0, compare=False)

    @property
    def is_check(self) -> bool:
        return self.kind != "query"


@dataclass
class Script:
    definitions: list[SetDef]
    commands: list[Command]
    fair: bool = False


# -- tokenizer -----------------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)?)"
    r"|(?P<op>=>|[!~*+(){},;:?=])"
)

FORMULA_KEYWORDS = {"F", "G", "N", "U", "in", "true", "false"}
SET_KEYWORDS = {"AND", "OR"}


@dataclass
class Tok:
    kind: str  # 'ident', 'op' or 'eof'
    text: str
    line: int
    col: int


def _tokenize(text: str, line: int = 1, col0: int = 1, line_starts: list[tuple[int, int, int]] | None = None) -> list[Tok]:
    """Tokenize one logical line.

    ``line_starts`` maps offsets of spliced continuation lines back to
    (offset, line, column-offset) so positions stay faithful to the source.
    """
    spans = line_starts or [(0, line, col0)]

    def where(pos: int) -> tuple[int, int]:
        off, ln, c0 = spans[0]
        for o, l, c in spans:
            if o <= pos:
                off, ln, c0 = o, l, c
        return ln, c0 + pos - off

    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            ln, c = where(pos)
            raise ScriptError(f"unknown operator token {text[pos]!r}", ln, c)
        if m.lastgroup != "ws":
            ln, c = where(pos)
            toks.append(Tok(m.lastgroup, m.group(), ln, c))
        pos = m.end()
    ln, c = where(len(text))
    toks.append(Tok("eof", "", ln, c))
    return toks


class _Parser:
    def __init__(self, toks: list[Tok], var: str | None = None):
        self.toks = toks
        self.i = 0
        self.var = var
        self.set_refs: list[Tok] = []

    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, expected: str) -> ScriptError:
        t = self.tok
        got = repr(t.text) if t.kind != "eof" else "end of line"
        return ScriptError(f"expected {expected}, got {got}", t.line, t.col)

    def at(self, text: str) -> bool:
        return self.tok.kind != "eof" and self.tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Tok:
        if not self.at(text):
            raise self.error(repr(text))
        t = self.tok
        self.i += 1
        return t

    def ident(self, what: str) -> Tok:
        t = self.tok
        if t.kind != "ident":
            raise self.error(what)
        self.i += 1
        return t

    def end(self) -> None:
        if self.tok.kind != "eof":
            raise self.error("end of line")

    # formulas
    def implies(self) -> Formula:
        left = self.until()
        if self.accept("=>"):
            return Implies(left, self.implies())
        return left

    def until(self) -> Formula:
        f = self.disj()
        while self.accept("U"):
            f = AU(f, self.disj())
        return f

    def disj(self) -> Formula:
        f = self.conj()
        while self.accept("+"):
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.accept("*"):
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        t = self.tok
        if self.accept("!"):
            return Not(self.unary())
        if self.accept("F"):
            return AF(self.unary())
        if self.accept("G"):
            return AG(self.unary())
        if self.accept("N"):
            return AX(self.unary())
        if self.accept("("):
            f = self.implies()
            self.expect(")")
            return f
        if self.accept("true"):
            return Const(True)
        if self.accept("false"):
            return Const(False)
        if self.accept("in"):
            nxt = self.tok
            if nxt.kind == "ident" and nxt.text == self.var and self.var is not None:
                self.i += 1
                return InVar(nxt.text)
            return InSet(self.set_unary())
        if t.kind == "ident" and t.text not in FORMULA_KEYWORDS | SET_KEYWORDS:
            self.i += 1
            if "." in t.text:
                a, s = t.text.split(".")
                return CompAtom(a, s)
            return Atom(t.text)
        if t.kind == "op" and t.text in ("~", "=", ":", ";", "?", "{", "}", ","):
            raise ScriptError(f"unexpected operator {t.text!r} in formula", t.line, t.col)
        raise self.error("formula")

    # set expressions
    def set_expr(self) -> SetExpr:
        e = self.set_and()
        while self.accept("OR"):
            e = SetOr(e, self.set_and())
        return e

    def set_and(self) -> SetExpr:
        e = self.set_unary()
        while self.accept("AND"):
            e = SetAnd(e, self.set_unary())
        return e

    def set_unary(self) -> SetExpr:
        if self.accept("~"):
            return SetNot(self.set_unary())
        if self.accept("("):
            e = self.set_expr()
            self.expect(")")
            return e
        if self.accept("{"):
            items = [self.ident("set item").text]
            while self.accept(","):
                items.append(self.ident("set item").text)
            self.expect("}")
            return SetLit(tuple(items))
        t = self.ident("set expression")
        if t.text in SET_KEYWORDS or "." in t.text:
            raise ScriptError(f"unexpected {t.text!r} in set expression", t.line, t.col)
        self.set_refs.append(t)
        return SetRef(t.text)


def parse_formula(text: str, var: str | None = None) -> Formula:
    """Parse a single formula body; ``var`` is the bound state variable, if any."""
    p = _Parser(_tokenize(text), var)
    f = p.implies()
    p.end()
    return f


def parse_set(text: str) -> SetExpr:
    p = _Parser(_tokenize(text))
    e = p.set_expr()
    p.end()
    return e


# -- printing ------------------------------------------------------------------

_PREC = {Implies: 1, AU: 2, Or: 3, And: 4}


def format_formula(f: Formula, _ctx: int = 0) -> str:
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, CompAtom):
        return f"{f.automaton}.{f.state}"
    if isinstance(f, InVar):
        return f"in {f.var}"
    if isinstance(f, InSet):
        return f"in {format_set(f.set, 3)}"
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, (Not, AX, AF, AG)):
        op = {Not: "!", AX: "N ", AF: "F ", AG: "G "}[type(f)]
        return op + format_formula(f.arg, 5)
    prec = _PREC[type(f)]
    op = {Implies: "=>", AU: "U", Or: "+", And: "*"}[type(f)]
    if isinstance(f, Implies):
        left, right = format_formula(f.left, prec + 1), format_formula(f.right, prec)
    else:
        left, right = format_formula(f.left, prec), format_formula(f.right, prec + 1)
    s = f"{left} {op} {right}"
    return f"({s})" if _ctx > prec else s


def format_set(e: SetExpr, _ctx: int = 0) -> str:
    if isinstance(e, SetLit):
        return "{" + ", ".join(e.items) + "}"
    if isinstance(e, SetRef):
        return e.name
    if isinstance(e, SetNot):
        return "~" + format_set(e.arg, 3)
    if isinstance(e, SetAnd):
        s = f"{format_set(e.left, 2)} AND {format_set(e.right, 3)}"
        return f"({s})" if _ctx > 2 else s
    if isinstance(e, SetOr):
        s = f"{format_set(e.left, 1)} OR {format_set(e.right, 2)}"
        return f"({s})" if _ctx > 1 else s
    raise TypeError(f"not a set expression: {e!r}")


def format_command(c: Command) -> str:
    body = format_formula(c.body)
    if c.kind == "plain":
        text = body
    elif c.kind == "query":
        text = f"? {c.var} : {body}"
    else:
        q = "A" if c.kind == "forall" else "E"
        dom = f" elof {format_set(c.domain)}" if c.domain is not None else ""
        text = f"{q} {c.var}{dom} ; {body}"
    if c.expect is not None:
        text = f"expect {'TRUE' if c.expect else 'FALSE'} {text}"
    return text


# -- scripts -------------------------------------------------------------------

_DEF_LINE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=(?!>)(.*)$")


def _strip_comment(line: str) -> str:
    i = line.find("//")
    return line if i < 0 else line[:i]


def _logical_lines(text: str) -> Iterable[tuple[str, list[tuple[int, int, int]], str]]:
    """Yield (code, span map, original source) with ``#`` continuations spliced."""
    buf = ""
    spans: list[tuple[int, int, int]] = []
    src: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        code = _strip_comment(raw).rstrip()
        if not buf and not code.strip():
            continue
        stripped = code.lstrip()
        lead = len(code) - len(stripped)
        spans.append((len(buf), lineno, lead + 1))
        src.append(raw.rstrip())
        if stripped.endswith("#"):
            buf += stripped[:-1] + " "
            continue
        buf += stripped
        yield buf, spans, "\n".join(src)
        buf, spans, src = "", [], []
    if buf:
        last_line = spans[-1][1]
        raise ScriptError("continuation '#' on the last line", last_line, 1)


def _parse_command(code: str, spans: list[tuple[int, int, int]], source: str) -> tuple[Command, list[Tok]]:
    toks = _tokenize(code, line_starts=spans)
    p = _Parser(toks)
    expect = None
    if p.at("expect"):
        p.i += 1
        t = p.ident("TRUE or FALSE")
        if t.text not in ("TRUE", "FALSE"):
            raise ScriptError(f"expected TRUE or FALSE after 'expect', got {t.text!r}", t.line, t.col)
        expect = t.text == "TRUE"
    line = toks[0].line

    def make(kind, body, var=None, domain=None):
        return Command(kind, body, var, domain, expect, source, line)

    first = p.tok
    if first.kind == "ident" and first.text in ("A", "E") and p.peek().kind == "ident":
        p.i += 1
        var = p.ident("variable").text
        domain = None
        if p.accept("elof"):
            domain = p.set_expr()
        p.expect(";")
        p.var = var
        body = p.implies()
        p.end()
        return make("forall" if first.text == "A" else "exists", body, var, domain), p.set_refs
    if p.accept("?"):
        var = p.ident("variable").text
        p.expect(":")
        p.var = var
        body = p.implies()
        p.end()
        return make("query", body, var), p.set_refs
    body = p.implies()
    p.end()
    return make("plain", body), p.set_refs


def parse_script(text: str) -> Script:
    """Parse a script into set definitions and commands, both in source order.

    A ``[SETS]`` header switches to definition mode; ``Name=SetExpr`` lines are
    then read until the first line that is not a definition.  Definitions may
    only refer to sets defined above them, and commands only to sets defined
    above the command.  A ``[FAIR]`` line selects fair path semantics for the
    whole script.
    """
    definitions: list[SetDef] = []
    commands: list[Command] = []
    defined: set[str] = set()
    in_sets = False
    fair = False
    for code, spans, source in _logical_lines(text):
        line = spans[0][1]
        head = code.strip()
        if head.startswith("["):
            if head == "[SETS]":
                in_sets = True
            elif head == "[FAIR]":
                fair = True
                in_sets = False
            else:
                raise ScriptError(f"unknown section {head!r}", line, spans[0][2])
            continue
        m = _DEF_LINE.match(code)
        if in_sets and m:
            name = m.group(1)
            if name in defined:
                raise ScriptError(f"duplicate set name {name!r}", line, spans[0][2])
            rhs_off = m.start(2)
            toks = _tokenize(m.group(2), line_starts=[(0, line, spans[0][2] + rhs_off)])
            p = _Parser(toks)
            expr = p.set_expr()
            p.end()
            for ref in p.set_refs:
                if ref.text not in defined:
                    raise ScriptError(f"unknown set {ref.text!r}", ref.line, ref.col)
            definitions.append(SetDef(name, expr, line))
            defined.add(name)
            continue
        in_sets = False
        cmd, refs = _parse_command(code, spans, source)
        for ref in refs:
            if ref.text not in defined:
                raise ScriptError(f"unknown set {ref.text!r}", ref.line, ref.col)
        commands.append(cmd)
    return Script(definitions, commands, fair)


# -- set resolution ------------------------------------------------------------


def _resolve_item(item: str, graph: ReachabilityGraph) -> frozenset[int]:
    if "." in item:
        auto, state = item.split(".", 1)
        try:
            k = graph.component_index(auto)
            graph.system.automata[k].state(state)
        except KeyError:
            raise ResolveError(f"unknown component state {item!r}") from None
        return frozenset(u for u in graph.nodes if graph.states[u].components[k] == state)
    is_signal = item in graph.system.signals
    global_ids = [u for u in graph.nodes if graph.states[u].name == item]
    if is_signal and global_ids:
        raise ResolveError(f"ambiguous set item {item!r}: both a signal and a global state")
    if is_signal:
        return frozenset(u for u in graph.nodes if item in graph.emits[u])
    if global_ids:
        return frozenset(global_ids)
    raise ResolveError(f"unknown signal or global state {item!r}")


def resolve_set(expr: SetExpr, graph: ReachabilityGraph, defs: dict[str, frozenset[int]] | Iterable[SetDef] = ()) -> frozenset[int]:
    """Resolve a set expression to node ids of ``graph``."""
    if not isinstance(defs, dict):
        defs = resolve_definitions(defs, graph)
    if isinstance(expr, SetLit):
        out: frozenset[int] = frozenset()
        for item in expr.items:
            out |= _resolve_item(item, graph)
        return out
    if isinstance(expr, SetRef):
        try:
            return defs[expr.name]
        except KeyError:
            raise ResolveError(f"unknown set {expr.name!r}") from None
    if isinstance(expr, SetNot):
        return frozenset(graph.nodes) - resolve_set(expr.arg, graph, defs)
    if isinstance(expr, SetAnd):
        return resolve_set(expr.left, graph, defs) & resolve_set(expr.right, graph, defs)
    if isinstance(expr, SetOr):
        return resolve_set(expr.left, graph, defs) | resolve_set(expr.right, graph, defs)
    raise TypeError(f"not a set expression: {expr!r}")


def resolve_definitions(defs: Iterable[SetDef], graph: ReachabilityGraph) -> dict[str, frozenset[int]]:
    env: dict[str, frozenset[int]] = {}
    for d in defs:
        env[d.name] = resolve_set(d.expr, graph, env)
    return env
