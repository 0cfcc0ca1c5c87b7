"""Synchronous product semantics and reachability-graph construction.

One global step: every external signal combination is tried; the valuation
for the step is the set of signals emitted by the current component states
plus the external choice.  Each automaton independently moves along any
enabled transition, or stays put if none is enabled.  The successors are the
Cartesian product of the per-automaton move sets.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from csmverify.model import System, eval_guard

DEFAULT_CAP = 1_000_000


class CapExceeded(Exception):
    """The reachable state space grew past the configured node cap."""

    def __init__(self, cap: int):
        self.cap = cap
        super().__init__(f"reachability graph exceeds node cap of {cap}")


@dataclass(frozen=True)
class GlobalState:
    components: tuple[str, ...]  # component state names, in System automaton order

    @property
    def name(self) -> str:
        return "_".join(self.components)

    def __str__(self) -> str:
        return self.name


def initial_state(system: System) -> GlobalState:
    return GlobalState(tuple(a.initial for a in system.automata))


def emitted(system: System, g: GlobalState) -> frozenset[str]:
    out: set[str] = set()
    for a, s in zip(system.automata, g.components):
        out |= a.state(s).emits
    return frozenset(out)


def step_valuation(system: System, g: GlobalState, externals: Mapping[str, bool]) -> dict[str, bool]:
    on = emitted(system, g)
    val = {sig: sig in on for sig in system.internals}
    for e in system.externals:
        val[e] = bool(externals[e])
    return val


def external_valuations(system: System) -> Iterable[dict[str, bool]]:
    for bits in itertools.product((False, True), repeat=len(system.externals)):
        yield dict(zip(system.externals, bits))


class _Stepper:
    def __init__(self, system: System):
        self.system = system
        self.internals = system.internals
        self.ext_vals = list(external_valuations(system))
        self.out = {
            (a.name, s.name): [(t.target, t.guard) for t in a.outgoing(s.name)]
            for a in system.automata
            for s in a.states
        }

    def successors(self, g: GlobalState, on: frozenset[str]) -> set[GlobalState]:
        result: set[GlobalState] = set()
        for ext in self.ext_vals:
            val = {sig: sig in on for sig in self.internals}
            val.update(ext)
            moves = []
            for a, s in zip(self.system.automata, g.components):
                targets = sorted({tgt for tgt, guard in self.out[(a.name, s)] if eval_guard(guard, val)})
                moves.append(targets or [s])
            result.update(GlobalState(c) for c in itertools.product(*moves))
        return result


def successors(system: System, g: GlobalState) -> set[GlobalState]:
    return _Stepper(system).successors(g, emitted(system, g))


@dataclass
class ReachabilityGraph:
    system: System
    states: list[GlobalState] = field(default_factory=list)
    succ: list[tuple[int, ...]] = field(default_factory=list)
    emits: list[frozenset[str]] = field(default_factory=list)
    initial: int = 0
    _index: dict[GlobalState, int] = field(default_factory=dict, repr=False)
    _pred: list[tuple[int, ...]] | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.states)

    @property
    def nodes(self) -> range:
        return range(len(self.states))

    @property
    def names(self) -> list[str]:
        return [s.name for s in self.states]

    @property
    def edges(self) -> set[tuple[int, int]]:
        return {(u, v) for u, vs in enumerate(self.succ) for v in vs}

    @property
    def pred(self) -> list[tuple[int, ...]]:
        if self._pred is None:
            acc: list[list[int]] = [[] for _ in self.states]
            for u, vs in enumerate(self.succ):
                for v in vs:
                    acc[v].append(u)
            self._pred = [tuple(p) for p in acc]
        return self._pred

    def id_of(self, state: GlobalState | str) -> int:
        if isinstance(state, GlobalState):
            return self._index[state]
        for i, s in enumerate(self.states):
            if s.name == state:
                return i
        raise KeyError(f"no global state named {state!r}")

    def component_index(self, automaton: str) -> int:
        for i, a in enumerate(self.system.automata):
            if a.name == automaton:
                return i
        raise KeyError(f"no automaton {automaton!r}")


def _order_key(g: GlobalState) -> tuple[str, tuple[str, ...]]:
    return (g.name, g.components)


def build_graph(system: System, cap: int = DEFAULT_CAP) -> ReachabilityGraph:
    """Breadth-first closure of ``successors`` from the initial state.

    Node ids follow discovery order; each successor set is visited in
    canonical-name order so the numbering is deterministic.
    """
    graph = ReachabilityGraph(system)
    stepper = _Stepper(system)

    def add(g: GlobalState) -> int:
        if len(graph.states) >= cap:
            raise CapExceeded(cap)
        graph._index[g] = len(graph.states)
        graph.states.append(g)
        graph.emits.append(emitted(system, g))
        graph.succ.append(())
        return len(graph.states) - 1

    queue = deque([add(initial_state(system))])
    while queue:
        u = queue.popleft()
        ids = []
        for h in sorted(stepper.successors(graph.states[u], graph.emits[u]), key=_order_key):
            j = graph._index.get(h)
            if j is None:
                j = add(h)
                queue.append(j)
            ids.append(j)
        graph.succ[u] = tuple(ids)
    return graph


def graph_stats(graph: ReachabilityGraph) -> dict[str, object]:
    sinks = sum(1 for u, vs in enumerate(graph.succ) if vs == (u,))
    return {
        "nodes": len(graph.states),
        "edges": sum(len(vs) for vs in graph.succ),
        "sinks": sinks,
        "initial": graph.states[graph.initial].name,
    }


def sink_names(graph: ReachabilityGraph) -> list[str]:
    return [graph.states[u].name for u, vs in enumerate(graph.succ) if vs == (u,)]


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(graph: ReachabilityGraph) -> str:
    name = graph.system.name
    lines = [f"digraph {_dot_quote(name)} {{", "  node [shape=circle];"]
    for u, g in enumerate(graph.states):
        attrs = [f"label={_dot_quote(g.name)}"]
        attrs.append(f"tooltip={_dot_quote(', '.join(sorted(graph.emits[u])))}")
        if u == graph.initial:
            attrs.append("shape=doublecircle")
        lines.append(f"  n{u} [{', '.join(attrs)}];")
    for u, vs in enumerate(graph.succ):
        for v in vs:
            lines.append(f"  n{u} -> n{v};")
    lines.append("}")
    return "\n".join(lines) + "\n"
