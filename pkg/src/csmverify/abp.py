"""Bundled Alternating Bit Protocol fixtures.

Five variants of the same four-automaton system (SENDER, RECEIVER,
SENDCHANNEL, ACKCHANNEL) differing only in where timeouts sit and how the
receiver starts.  Each ships as ``<id>.csm`` plus an ``expect``-annotated
``<id>.tl`` script; variant A also has ``A-structure.tl``, which checks the
quarter decomposition in ``QUARTERS``.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from csmverify.model import System, parse_model
from csmverify.reachability import ReachabilityGraph, build_graph
from csmverify.tl import Script, parse_script

_PACKAGE = "csmverify.models.abp"

VARIANTS: dict[str, str] = {
    "A": "timeouts in both sender and receiver; receiver starts in RINIT",
    "B": "no receiver timeout; RINIT merged into the initial RWAIT0",
    "C-broken": "no sender timeout; receiver keeps the silent RINIT start",
    "C-fixed": "no sender timeout; receiver starts in a waiting state and times out",
    "D": "no timeouts anywhere",
}

# Super-state table for variant A.  A global state belongs to a quarter by
# the sender's current bit and the last acknowledgment the receiver produced.
SENDER_BIT = {"SEND0": 0, "SWAIT0": 0, "SEND1": 1, "SWAIT1": 1}
RECEIVER_ACK = {"ACK0": 0, "RWAIT1": 0, "ACK1": 1, "RWAIT0": 1, "RINIT": None}
QUARTERS = ["INIT", "Q00", "Q10", "Q11", "Q01"]  # order of first entry


class UnknownVariant(KeyError):
    pass


@dataclass(frozen=True)
class VariantFixture:
    id: str
    description: str
    model_source: str
    script_source: str

    def system(self) -> System:
        return parse_model(self.model_source)

    def script(self) -> Script:
        return parse_script(self.script_source)

    def graph(self) -> ReachabilityGraph:
        return build_graph(self.system())


@dataclass(frozen=True)
class ExpectedVerdict:
    source: str
    result: bool | None  # None for a query command
    violations: tuple[str, ...] | None  # only pinned for queries


def read_resource(name: str) -> str:
    return resources.files(_PACKAGE).joinpath(name).read_text(encoding="utf-8")


def resource_path(name: str):
    """Traversable for a bundled file; ``str()`` of it is a usable path for
    a regular (non-zipped) install."""
    return resources.files(_PACKAGE).joinpath(name)


def list_variants() -> list[tuple[str, str]]:
    return list(VARIANTS.items())


def load_variant(variant: str) -> VariantFixture:
    if variant not in VARIANTS:
        raise UnknownVariant(f"unknown variant {variant!r}; known: {', '.join(VARIANTS)}")
    return VariantFixture(variant, VARIANTS[variant], read_resource(f"{variant}.csm"), read_resource(f"{variant}.tl"))


def structure_script() -> Script:
    return parse_script(read_resource("A-structure.tl"))


def _query_violations(fixture: VariantFixture) -> dict[int, tuple[str, ...]]:
    # Query outputs are pinned by the "NOT <state>" lines in the header
    # comments of the script, not computed here.
    pinned: dict[int, tuple[str, ...]] = {}
    for line in fixture.script_source.splitlines():
        line = line.strip()
        if line.startswith("// query ") and ":" in line:
            idx, names = line[len("// query "):].split(":", 1)
            pinned[int(idx)] = tuple(n for n in names.split() if n)
    return pinned


def expected_verdicts(variant: str) -> list[ExpectedVerdict]:
    """Ordered (source, expected result, expected violations) per command.

    Check commands default to TRUE unless prefixed ``expect FALSE``.  Query
    commands carry their expected failing states in a ``// query <n>:``
    comment, where ``n`` is the command's index in the script.
    """
    fixture = load_variant(variant)
    pinned = _query_violations(fixture)
    out = []
    for i, cmd in enumerate(fixture.script().commands):
        if cmd.is_check:
            out.append(ExpectedVerdict(cmd.source, True if cmd.expect is None else cmd.expect, None))
        else:
            out.append(ExpectedVerdict(cmd.source, None, pinned.get(i)))
    return out


def quarter_of(graph: ReachabilityGraph, node: int) -> str | None:
    """Quarter label of a node, or None if the table does not cover it."""
    si = graph.component_index("SENDER")
    ri = graph.component_index("RECEIVER")
    comps = graph.states[node].components
    bit = SENDER_BIT.get(comps[si])
    if bit is None or comps[ri] not in RECEIVER_ACK:
        return None
    ack = RECEIVER_ACK[comps[ri]]
    if ack is None:
        return "INIT" if bit == 0 else None
    return f"Q{bit}{ack}"


def quarter_violations(graph: ReachabilityGraph) -> list[str]:
    """Problems with the quarter decomposition: uncovered nodes and edges
    that jump anywhere other than the same or the next quarter."""
    allowed = {"INIT": {"INIT", "Q00"}, "Q00": {"Q00", "Q10"}, "Q10": {"Q10", "Q11"},
               "Q11": {"Q11", "Q01"}, "Q01": {"Q01", "Q00"}}
    labels = [quarter_of(graph, u) for u in graph.nodes]
    problems = [f"{graph.states[u].name} has no quarter" for u, q in enumerate(labels) if q is None]
    for u, vs in enumerate(graph.succ):
        for v in vs:
            if labels[u] and labels[v] and labels[v] not in allowed[labels[u]]:
                problems.append(f"{graph.states[u].name} ({labels[u]}) -> {graph.states[v].name} ({labels[v]})")
    return problems
