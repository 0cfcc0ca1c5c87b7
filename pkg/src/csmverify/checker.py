"""Fixpoint labeling of formulas over a reachability graph.

All temporal operators quantify over every path: ``N`` is AX, ``F`` is AF,
``G`` is AG and ``U`` is the strong until A[f U g].  "Future" includes the
present state.

With ``fair=True`` the path quantifier ranges over fair paths only: paths
that, once they visit a state infinitely often, take each of its outgoing
edges infinitely often.  On a finite graph those are exactly the paths that
end up circulating through a whole bottom strongly connected component, so a
nondeterministic branch can no longer be ignored forever.  AX and AG are
unaffected; AF and AU change.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from csmverify import tl
from csmverify.reachability import ReachabilityGraph
from csmverify.tl import Command, Formula, ResolveError, Script


class MissingBinding(Exception):
    pass


@dataclass
class Verdict:
    result: bool
    violations: tuple[int, ...] = ()
    elapsed: float = 0.0  # seconds
    names: tuple[str, ...] = field(default=(), repr=False)


# -- graph primitives ----------------------------------------------------------


def _pre_all(graph: ReachabilityGraph, target: frozenset[int] | set[int]) -> set[int]:
    return {u for u in graph.nodes if all(v in target for v in graph.succ[u])}


def _until(graph: ReachabilityGraph, left: frozenset[int], right: frozenset[int]) -> frozenset[int]:
    """Least fixpoint X = right | (left & {u : succ(u) <= X}), via successor counters."""
    remaining = [len(vs) for vs in graph.succ]
    pred = graph.pred
    result = set(right)
    queue = deque(right)
    while queue:
        v = queue.popleft()
        for u in pred[v]:
            remaining[u] -= 1
            if remaining[u] == 0 and u not in result and u in left:
                result.add(u)
                queue.append(u)
    return frozenset(result)


def _exists_until(graph: ReachabilityGraph, left: frozenset[int], right: frozenset[int]) -> frozenset[int]:
    """Least fixpoint X = right | (left & {u : some successor in X})."""
    pred = graph.pred
    result = set(right)
    queue = deque(right)
    while queue:
        v = queue.popleft()
        for u in pred[v]:
            if u not in result and u in left:
                result.add(u)
                queue.append(u)
    return frozenset(result)


def strongly_connected_components(graph: ReachabilityGraph) -> list[list[int]]:
    """Iterative Tarjan; components come out in reverse topological order."""
    index = [-1] * len(graph)
    low = [0] * len(graph)
    on_stack = [False] * len(graph)
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in graph.nodes:
        if index[root] >= 0:
            continue
        work = [(root, 0)]
        while work:
            u, i = work.pop()
            if i == 0:
                index[u] = low[u] = counter
                counter += 1
                stack.append(u)
                on_stack[u] = True
            succ = graph.succ[u]
            if i < len(succ):
                work.append((u, i + 1))
                v = succ[i]
                if index[v] < 0:
                    work.append((v, 0))
                elif on_stack[v]:
                    low[u] = min(low[u], index[v])
                continue
            if low[u] == index[u]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == u:
                        break
                comps.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[u])
    return comps


def bottom_components(graph: ReachabilityGraph) -> list[frozenset[int]]:
    out = []
    for comp in strongly_connected_components(graph):
        members = frozenset(comp)
        if all(v in members for u in comp for v in graph.succ[u]):
            out.append(members)
    return out


# -- labeling ------------------------------------------------------------------


def _mentions_var(f: Formula) -> bool:
    if isinstance(f, tl.InVar):
        return True
    return any(_mentions_var(sub) for sub in _children(f))


def _children(f: Formula) -> Iterable[Formula]:
    for attr in ("arg", "left", "right"):
        sub = getattr(f, attr, None)
        if sub is not None:
            yield sub


class Labeler:
    """Computes sat sets, caching binding-independent subformulas."""

    def __init__(self, graph: ReachabilityGraph, defs: dict[str, frozenset[int]] | None = None, fair: bool = False):
        self.graph = graph
        self.defs = defs or {}
        self.fair = fair
        self.all = frozenset(graph.nodes)
        self._cache: dict[Formula, frozenset[int]] = {}
        self._bottoms: list[frozenset[int]] | None = None

    def sat(self, f: Formula, binding: tuple[str, int] | None = None) -> frozenset[int]:
        if not _mentions_var(f):
            hit = self._cache.get(f)
            if hit is None:
                hit = self._sat(f, None)
                self._cache[f] = hit
            return hit
        return self._sat(f, binding)

    def _sat(self, f: Formula, binding: tuple[str, int] | None) -> frozenset[int]:
        g = self.graph
        if isinstance(f, tl.Const):
            return self.all if f.value else frozenset()
        if isinstance(f, tl.Atom):
            if f.name not in g.system.signals:
                raise ResolveError(f"unknown signal {f.name!r}")
            return frozenset(u for u in g.nodes if f.name in g.emits[u])
        if isinstance(f, tl.CompAtom):
            return tl.resolve_set(tl.SetLit((f"{f.automaton}.{f.state}",)), g, self.defs)
        if isinstance(f, tl.InVar):
            if binding is None or binding[0] != f.var:
                raise MissingBinding(f"no binding for state variable {f.var!r}")
            return frozenset((binding[1],))
        if isinstance(f, tl.InSet):
            return tl.resolve_set(f.set, g, self.defs)
        if isinstance(f, tl.Not):
            return self.all - self.sat(f.arg, binding)
        if isinstance(f, tl.And):
            return self.sat(f.left, binding) & self.sat(f.right, binding)
        if isinstance(f, tl.Or):
            return self.sat(f.left, binding) | self.sat(f.right, binding)
        if isinstance(f, tl.Implies):
            return (self.all - self.sat(f.left, binding)) | self.sat(f.right, binding)
        if isinstance(f, tl.AX):
            return frozenset(_pre_all(g, self.sat(f.arg, binding)))
        if isinstance(f, tl.AG):
            bad = self.all - self.sat(f.arg, binding)
            return self.all - _exists_until(g, self.all, bad)
        if isinstance(f, tl.AF):
            return self.until(self.all, self.sat(f.arg, binding))
        if isinstance(f, tl.AU):
            return self.until(self.sat(f.left, binding), self.sat(f.right, binding))
        raise TypeError(f"not a formula: {f!r}")

    def until(self, left: frozenset[int], right: frozenset[int]) -> frozenset[int]:
        if not self.fair:
            return _until(self.graph, left, right)
        # a fair path violates f U g by hitting !f & !g first, or by settling
        # into a bottom component that never shows g
        if self._bottoms is None:
            self._bottoms = bottom_components(self.graph)
        not_right = self.all - right
        trap = set(not_right - left)
        for comp in self._bottoms:
            if comp <= not_right:
                trap |= comp
        return self.all - _exists_until(self.graph, not_right, frozenset(trap))


def sat(graph: ReachabilityGraph, f: Formula, binding: tuple[str, int] | None = None, *,
        defs: dict[str, frozenset[int]] | None = None, fair: bool = False) -> frozenset[int]:
    return Labeler(graph, defs, fair).sat(f, binding)


# -- commands ------------------------------------------------------------------


def _verdict(graph: ReachabilityGraph, violations: Iterable[int], start: float, holds: bool | None = None) -> Verdict:
    viol = tuple(sorted(violations))
    result = not viol if holds is None else holds
    return Verdict(result, viol, time.perf_counter() - start, tuple(graph.states[u].name for u in viol))


def check_plain(graph: ReachabilityGraph, body: Formula, *, labeler: Labeler | None = None) -> Verdict:
    start = time.perf_counter()
    lab = labeler or Labeler(graph)
    return _verdict(graph, lab.all - lab.sat(body), start)


def _holding(lab: Labeler, var: str, domain: Iterable[int], body: Formula) -> list[tuple[int, bool]]:
    return [(s, s in lab.sat(body, (var, s))) for s in sorted(domain)]


def check_forall(graph: ReachabilityGraph, var: str, domain: Iterable[int] | None, body: Formula, *,
                 labeler: Labeler | None = None) -> Verdict:
    start = time.perf_counter()
    lab = labeler or Labeler(graph)
    dom = lab.all if domain is None else domain
    return _verdict(graph, [s for s, ok in _holding(lab, var, dom, body) if not ok], start)


def check_exists(graph: ReachabilityGraph, var: str, domain: Iterable[int] | None, body: Formula, *,
                 labeler: Labeler | None = None) -> Verdict:
    start = time.perf_counter()
    lab = labeler or Labeler(graph)
    dom = sorted(lab.all if domain is None else domain)
    found = any(ok for _, ok in _holding(lab, var, dom, body))
    return _verdict(graph, () if found else dom, start, holds=found)


def run_query(graph: ReachabilityGraph, var: str, body: Formula, *, labeler: Labeler | None = None) -> list[tuple[int, bool]]:
    lab = labeler or Labeler(graph)
    return _holding(lab, var, lab.all, body)


# -- rendering -----------------------------------------------------------------


def format_elapsed(seconds: float) -> str:
    hundredths = int(round(seconds * 100))
    secs, cc = divmod(hundredths, 100)
    mins, ss = divmod(secs, 60)
    hh, mm = divmod(mins, 60)
    return f"{hh:02d}:{mm:02d}:{ss:02d}/{cc:02d}"


def render_result(verdict: Verdict) -> list[str]:
    return [
        "--> TRUE" if verdict.result else "--> FALSE",
        f"Evaluation time is {format_elapsed(verdict.elapsed)}",
    ]


def render_query(graph: ReachabilityGraph, rows: list[tuple[int, bool]]) -> list[str]:
    failing = [graph.states[u].name for u, ok in rows if not ok]
    return ["--> FULFILLED FOR STATES:"] + ([f"NOT {n}" for n in failing] or ["ALL"])


# -- scripts -------------------------------------------------------------------


@dataclass
class CommandResult:
    index: int
    command: Command
    verdict: Verdict | None = None  # check commands
    rows: list[tuple[int, bool]] | None = None  # query commands
    elapsed: float = 0.0
    graph_names: list[str] = field(default_factory=list, repr=False)

    @property
    def violation_names(self) -> list[str]:
        if self.verdict is not None:
            return list(self.verdict.names)
        return [self.graph_names[u] for u, ok in self.rows or () if not ok]

    @property
    def matches_expectation(self) -> bool:
        if self.verdict is None:
            return True
        want = True if self.command.expect is None else self.command.expect
        return self.verdict.result == want


def run_command(graph: ReachabilityGraph, cmd: Command, lab: Labeler, index: int = 0) -> CommandResult:
    start = time.perf_counter()
    res = CommandResult(index, cmd, graph_names=graph.names)
    if cmd.kind == "plain":
        if _mentions_var(cmd.body):
            raise MissingBinding("state variable used outside a quantified command")
        res.verdict = check_plain(graph, cmd.body, labeler=lab)
    elif cmd.kind in ("forall", "exists"):
        domain = None if cmd.domain is None else tl.resolve_set(cmd.domain, graph, lab.defs)
        check = check_forall if cmd.kind == "forall" else check_exists
        res.verdict = check(graph, cmd.var, domain, cmd.body, labeler=lab)
    else:
        res.rows = run_query(graph, cmd.var, cmd.body, labeler=lab)
    res.elapsed = time.perf_counter() - start
    if res.verdict is not None:
        res.verdict.elapsed = res.elapsed
    return res


def run_script(graph: ReachabilityGraph, script: Script, fair: bool | None = None) -> list[CommandResult]:
    """Evaluate every command in order; ``fair`` overrides the script's own setting."""
    defs = tl.resolve_definitions(script.definitions, graph)
    lab = Labeler(graph, defs, script.fair if fair is None else fair)
    return [run_command(graph, cmd, lab, i) for i, cmd in enumerate(script.commands)]


def render_command(graph: ReachabilityGraph, res: CommandResult) -> list[str]:
    lines = res.command.source.splitlines() or [tl.format_command(res.command)]
    if res.verdict is not None:
        return lines + render_result(res.verdict)
    return lines + render_query(graph, res.rows or [])
