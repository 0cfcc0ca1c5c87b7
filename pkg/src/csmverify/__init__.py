"""Explicit-state verification of Concurrent State Machine (CSM) systems.

Pipeline: ``parse_model`` -> ``build_graph`` -> ``parse_script`` -> ``run_script``.
"""

from csmverify.model import (
    Automaton,
    ComponentState,
    Diagnostic,
    ModelError,
    System,
    Transition,
    eval_guard,
    format_model,
    parse_model,
    validate,
)
from csmverify.reachability import (
    CapExceeded,
    GlobalState,
    ReachabilityGraph,
    build_graph,
    export_dot,
    graph_stats,
    initial_state,
    step_valuation,
    successors,
)
from csmverify.tl import (
    ScriptError,
    parse_formula,
    parse_script,
    resolve_set,
)
from csmverify.checker import (
    Verdict,
    check_exists,
    check_forall,
    check_plain,
    render_result,
    run_query,
    run_script,
    sat,
)

__all__ = [
    "Automaton",
    "CapExceeded",
    "ComponentState",
    "Diagnostic",
    "GlobalState",
    "ModelError",
    "ReachabilityGraph",
    "ScriptError",
    "System",
    "Transition",
    "Verdict",
    "build_graph",
    "check_exists",
    "check_forall",
    "check_plain",
    "eval_guard",
    "export_dot",
    "format_model",
    "graph_stats",
    "initial_state",
    "parse_formula",
    "parse_model",
    "parse_script",
    "render_result",
    "resolve_set",
    "run_query",
    "run_script",
    "sat",
    "step_valuation",
    "successors",
    "validate",
]
