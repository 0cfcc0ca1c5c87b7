"""CSM domain types, the textual model format, and model validation.

Model format::

    system ABP ;
    external lost, rlost ;
    automaton SENDER {
      state SEND0 emits send0 ;
      state SWAIT0 ;
      initial SEND0 ;
      trans SEND0 -> SWAIT0 when true ;
    }

States emit signals (Moore style); transitions carry boolean guards over
signal names with ``!`` (not), ``*`` (and), ``+`` (or).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Union


class ModelError(Exception):
    """Syntax or name-resolution error in a model source."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.message = message
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(where + message)


# -- guards ------------------------------------------------------------------


@dataclass(frozen=True)
class Sig:
    name: str


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Not:
    arg: "Guard"


@dataclass(frozen=True)
class And:
    left: "Guard"
    right: "Guard"


@dataclass(frozen=True)
class Or:
    left: "Guard"
    right: "Guard"


Guard = Union[Sig, Const, Not, And, Or]

TRUE = Const(True)


def guard_atoms(g: Guard) -> set[str]:
    if isinstance(g, Sig):
        return {g.name}
    if isinstance(g, Const):
        return set()
    if isinstance(g, Not):
        return guard_atoms(g.arg)
    return guard_atoms(g.left) | guard_atoms(g.right)


def eval_guard(g: Guard, valuation: Mapping[str, bool]) -> bool:
    if isinstance(g, Sig):
        try:
            return bool(valuation[g.name])
        except KeyError:
            raise KeyError(f"unbound signal {g.name!r}") from None
    if isinstance(g, Const):
        return g.value
    if isinstance(g, Not):
        return not eval_guard(g.arg, valuation)
    if isinstance(g, And):
        return eval_guard(g.left, valuation) and eval_guard(g.right, valuation)
    if isinstance(g, Or):
        return eval_guard(g.left, valuation) or eval_guard(g.right, valuation)
    raise TypeError(f"not a guard: {g!r}")


def format_guard(g: Guard, _prec: int = 0) -> str:
    # precedence: + 1, * 2, ! 3
    if isinstance(g, Sig):
        return g.name
    if isinstance(g, Const):
        return "true" if g.value else "false"
    if isinstance(g, Not):
        return "!" + format_guard(g.arg, 3)
    if isinstance(g, And):
        s = f"{format_guard(g.left, 2)} * {format_guard(g.right, 3)}"
        return f"({s})" if _prec > 2 else s
    if isinstance(g, Or):
        s = f"{format_guard(g.left, 1)} + {format_guard(g.right, 2)}"
        return f"({s})" if _prec > 1 else s
    raise TypeError(f"not a guard: {g!r}")


# -- structure ---------------------------------------------------------------


@dataclass(frozen=True)
class ComponentState:
    automaton: str
    name: str
    emits: frozenset[str] = frozenset()

    @property
    def qualified(self) -> str:
        return f"{self.automaton}.{self.name}"


@dataclass(frozen=True)
class Transition:
    source: str
    target: str
    guard: Guard = TRUE


@dataclass(frozen=True)
class Automaton:
    name: str
    states: tuple[ComponentState, ...]
    initial: str
    transitions: tuple[Transition, ...] = ()

    def state(self, name: str) -> ComponentState:
        for s in self.states:
            if s.name == name:
                return s
        raise KeyError(f"{self.name} has no state {name!r}")

    def outgoing(self, name: str) -> tuple[Transition, ...]:
        return tuple(t for t in self.transitions if t.source == name)


@dataclass(frozen=True)
class System:
    name: str
    automata: tuple[Automaton, ...]
    externals: tuple[str, ...] = ()

    @property
    def internals(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for a in self.automata:
            for s in a.states:
                for sig in sorted(s.emits):
                    seen.setdefault(sig)
        return tuple(seen)

    @property
    def signals(self) -> tuple[str, ...]:
        return self.internals + tuple(e for e in self.externals if e not in self.internals)

    def automaton(self, name: str) -> Automaton:
        for a in self.automata:
            if a.name == name:
                return a
        raise KeyError(f"no automaton {name!r}")


@dataclass(frozen=True)
class Diagnostic:
    message: str
    automaton: str | None = None
    state: str | None = None

    def __str__(self) -> str:
        ctx = ".".join(x for x in (self.automaton, self.state) if x)
        return f"{ctx}: {self.message}" if ctx else self.message


def validate(system: System) -> list[Diagnostic]:
    """Check the structural invariants of a System; one diagnostic per violation."""
    diags: list[Diagnostic] = []
    names = [a.name for a in system.automata]
    for n in sorted({n for n in names if names.count(n) > 1}):
        diags.append(Diagnostic("duplicate automaton name", n))
    ext = list(system.externals)
    for e in sorted({e for e in ext if ext.count(e) > 1}):
        diags.append(Diagnostic(f"duplicate external signal {e!r}"))
    internals = set(system.internals)
    for sig in sorted(internals & set(ext)):
        diags.append(Diagnostic(f"signal {sig!r} both internal and external"))
    known = internals | set(ext)

    for a in system.automata:
        if not a.states:
            diags.append(Diagnostic("automaton has no states", a.name))
        snames = [s.name for s in a.states]
        for n in sorted({n for n in snames if snames.count(n) > 1}):
            diags.append(Diagnostic("duplicate state name", a.name, n))
        for s in a.states:
            if s.automaton != a.name:
                diags.append(Diagnostic(f"state belongs to automaton {s.automaton!r}", a.name, s.name))
        if a.initial not in snames:
            diags.append(Diagnostic(f"initial state {a.initial!r} not among states", a.name))
        for t in a.transitions:
            for end in (t.source, t.target):
                if end not in snames:
                    diags.append(Diagnostic(f"transition endpoint {end!r} not in automaton", a.name, t.source))
            for sig in sorted(guard_atoms(t.guard) - known):
                diags.append(Diagnostic(f"unknown signal {sig!r} in guard", a.name, t.source))
    return diags


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>//[^\n]*)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<arrow>->)|(?P<punct>[;,{}()!*+])"
)

KEYWORDS = {"system", "external", "automaton", "state", "emits", "initial", "trans", "when", "true", "false"}


@dataclass
class Token:
    kind: str  # 'ident', 'punct' or 'eof'
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ModelError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "ident":
            tokens.append(Token("ident", m.group(), line, pos - line_start + 1))
        elif kind in ("arrow", "punct"):
            tokens.append(Token("punct", m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.atoms: list[Token] = []

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, expected: str) -> ModelError:
        t = self.tok
        got = repr(t.text) if t.kind != "eof" else "end of input"
        return ModelError(f"expected {expected}, got {got}", t.line, t.col)

    def accept(self, text: str) -> Token | None:
        if self.tok.text == text and self.tok.kind != "eof":
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, text: str) -> Token:
        t = self.accept(text)
        if t is None:
            raise self.error(repr(text))
        return t

    def ident(self, what: str = "identifier") -> Token:
        t = self.tok
        if t.kind != "ident" or t.text in KEYWORDS:
            raise self.error(what)
        self.i += 1
        return t

    # guard := disj ; disj := conj ('+' conj)* ; conj := unary ('*' unary)*
    def guard(self) -> Guard:
        g = self.conj()
        while self.accept("+"):
            g = Or(g, self.conj())
        return g

    def conj(self) -> Guard:
        g = self.unary()
        while self.accept("*"):
            g = And(g, self.unary())
        return g

    def unary(self) -> Guard:
        if self.accept("!"):
            return Not(self.unary())
        if self.accept("("):
            g = self.guard()
            self.expect(")")
            return g
        if self.accept("true"):
            return Const(True)
        if self.accept("false"):
            return Const(False)
        t = self.ident("signal name or '('")
        self.atoms.append(t)
        return Sig(t.text)

    def name_list(self) -> list[Token]:
        out = [self.ident("signal name")]
        while self.accept(","):
            out.append(self.ident("signal name"))
        return out


def parse_model(text: str) -> System:
    """Parse a model document; raises ModelError with line/column on any problem."""
    p = _Parser(text)
    p.expect("system")
    sys_name = p.ident("system name").text
    p.expect(";")

    externals: list[Token] = []
    if p.accept("external"):
        externals = p.name_list()
        p.expect(";")

    # raw automata: (name token, states, initial token, transitions)
    raw = []
    while p.tok.kind != "eof":
        p.expect("automaton")
        a_tok = p.ident("automaton name")
        p.expect("{")
        states: list[tuple[Token, list[Token]]] = []
        initial: Token | None = None
        trans: list[tuple[Token, Token, Guard, list[Token]]] = []
        while not p.accept("}"):
            if p.accept("state"):
                s_tok = p.ident("state name")
                emits = p.name_list() if p.accept("emits") else []
                p.expect(";")
                states.append((s_tok, emits))
            elif p.tok.text == "initial":
                kw = p.expect("initial")
                if initial is not None:
                    raise ModelError("initial state declared twice", kw.line, kw.col)
                initial = p.ident("state name")
                p.expect(";")
            elif p.accept("trans"):
                src = p.ident("state name")
                p.expect("->")
                dst = p.ident("state name")
                p.expect("when")
                p.atoms = []
                g = p.guard()
                p.expect(";")
                trans.append((src, dst, g, p.atoms))
            else:
                raise p.error("'state', 'initial', 'trans' or '}'")
        raw.append((a_tok, states, initial, trans))

    if not raw:
        raise p.error("'automaton'")

    # name checks, in source order
    seen_auto: set[str] = set()
    emitted: dict[str, Token] = {}
    for a_tok, states, initial, _ in raw:
        if a_tok.text in seen_auto:
            raise ModelError(f"duplicate automaton name {a_tok.text!r}", a_tok.line, a_tok.col)
        seen_auto.add(a_tok.text)
        seen_state: set[str] = set()
        for s_tok, emits in states:
            if s_tok.text in seen_state:
                raise ModelError(f"duplicate state name {a_tok.text}.{s_tok.text}", s_tok.line, s_tok.col)
            seen_state.add(s_tok.text)
            for e in emits:
                emitted.setdefault(e.text, e)
        if initial is None:
            raise ModelError(f"automaton {a_tok.text!r} has no initial state", a_tok.line, a_tok.col)
        if initial.text not in seen_state:
            raise ModelError(f"initial state {initial.text!r} is not a state of {a_tok.text}", initial.line, initial.col)

    ext_names: list[str] = []
    for e in externals:
        if e.text in ext_names:
            raise ModelError(f"duplicate external signal {e.text!r}", e.line, e.col)
        if e.text in emitted:
            raise ModelError(f"signal {e.text!r} both internal and external", e.line, e.col)
        ext_names.append(e.text)
    known = set(emitted) | set(ext_names)

    automata = []
    for a_tok, states, initial, trans in raw:
        snames = {s.text for s, _ in states}
        transitions = []
        for src, dst, g, atoms in trans:
            for end in (src, dst):
                if end.text not in snames:
                    raise ModelError(f"unknown state {end.text!r} in {a_tok.text}", end.line, end.col)
            for atom in atoms:
                if atom.text not in known:
                    raise ModelError(f"unknown signal {atom.text!r}", atom.line, atom.col)
            transitions.append(Transition(src.text, dst.text, g))
        automata.append(
            Automaton(
                a_tok.text,
                tuple(ComponentState(a_tok.text, s.text, frozenset(e.text for e in emits)) for s, emits in states),
                initial.text,
                tuple(transitions),
            )
        )
    return System(sys_name, tuple(automata), tuple(ext_names))


def format_model(system: System) -> str:
    lines = [f"system {system.name} ;"]
    if system.externals:
        lines.append(f"external {', '.join(system.externals)} ;")
    for a in system.automata:
        lines.append("")
        lines.append(f"automaton {a.name} {{")
        for s in a.states:
            emits = f" emits {', '.join(sorted(s.emits))}" if s.emits else ""
            lines.append(f"  state {s.name}{emits} ;")
        lines.append(f"  initial {a.initial} ;")
        for t in a.transitions:
            lines.append(f"  trans {t.source} -> {t.target} when {format_guard(t.guard)} ;")
        lines.append("}")
    return "\n".join(lines) + "\n"
