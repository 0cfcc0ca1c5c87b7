"""Command-line front end: ``csmverify check`` and ``csmverify graph``.

Exit status for ``check``: 0 when every check command matches its expected
verdict (TRUE unless prefixed ``expect FALSE``), 1 otherwise, 2 on input
errors.  ``graph`` exits 0, 2 on input errors, or 3 when the node cap is hit.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, TextIO

from csmverify import abp
from csmverify.checker import CommandResult, MissingBinding, render_command, run_script
from csmverify.model import ModelError, parse_model, validate
from csmverify.reachability import DEFAULT_CAP, CapExceeded, build_graph, export_dot, graph_stats, sink_names
from csmverify.tl import ResolveError, ScriptError, parse_script

EXIT_OK, EXIT_FALSE, EXIT_ERROR, EXIT_CAP = 0, 1, 2, 3


@dataclass
class RunConfig:
    model: Path
    script: Path | None = None
    records: bool = False
    cap: int = DEFAULT_CAP
    dot: Path | None = None
    stats: bool = False
    semantics: str | None = None  # None: as declared by the script


class InputError(Exception):
    pass


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"{path}: cannot read: {e.strerror or e}") from None


def _where(path: Path, line: int | None, col: int | None) -> str:
    if line is None:
        return str(path)
    return f"{path}:{line}" + (f":{col}" if col is not None else "")


def _load_graph(cfg: RunConfig):
    text = _read(cfg.model)
    try:
        system = parse_model(text)
    except ModelError as e:
        raise InputError(f"{_where(cfg.model, e.line, e.col)}: {e.message}") from None
    diags = validate(system)
    if diags:
        raise InputError("\n".join(f"{cfg.model}: {d}" for d in diags))
    return build_graph(system, cap=cfg.cap)


def _record(res: CommandResult) -> dict:
    verdict = None if res.verdict is None else ("TRUE" if res.verdict.result else "FALSE")
    return {
        "index": res.index,
        "source": res.command.source,
        "verdict": verdict,
        "violations": res.violation_names,
        "elapsed_hundredths": int(round(res.elapsed * 100)),
    }


def cmd_check(cfg: RunConfig, out: TextIO, err: TextIO) -> int:
    try:
        if cfg.script is None:
            raise InputError("check needs a script path")
        script_text = _read(cfg.script)
        graph = _load_graph(cfg)
        try:
            script = parse_script(script_text)
        except ScriptError as e:
            raise InputError(f"{_where(cfg.script, e.line, e.col)}: {e.message}") from None
        fair = None if cfg.semantics is None else cfg.semantics == "fair"
        try:
            results = run_script(graph, script, fair=fair)
        except (ResolveError, MissingBinding) as e:
            raise InputError(f"{cfg.script}: {e}") from None
    except CapExceeded as e:
        print(f"error: {e}", file=err)
        return EXIT_ERROR
    except InputError as e:
        print(f"error: {e}", file=err)
        return EXIT_ERROR

    for i, res in enumerate(results):
        if cfg.records:
            print(json.dumps(_record(res)), file=out)
            continue
        if i:
            print(file=out)
        print("\n".join(render_command(graph, res)), file=out)
    return EXIT_OK if all(r.matches_expectation for r in results) else EXIT_FALSE


def cmd_graph(cfg: RunConfig, out: TextIO, err: TextIO) -> int:
    try:
        graph = _load_graph(cfg)
    except CapExceeded as e:
        print(f"error: {e}", file=err)
        return EXIT_CAP
    except InputError as e:
        print(f"error: {e}", file=err)
        return EXIT_ERROR
    stats = graph_stats(graph)
    if cfg.stats or cfg.dot is None:
        if cfg.records:
            print(json.dumps({**stats, "sink_names": sink_names(graph)}), file=out)
        else:
            rows = [*stats.items(), *(("sink", n) for n in sink_names(graph))]
            for key, value in rows:
                print(f"{key + ':':9}{value}", file=out)
    if cfg.dot is not None:
        try:
            cfg.dot.write_text(export_dot(graph), encoding="utf-8")
        except OSError as e:
            print(f"error: {cfg.dot}: cannot write: {e.strerror or e}", file=err)
            return EXIT_ERROR
    return EXIT_OK


def cmd_variants(out: TextIO) -> int:
    for vid, desc in abp.list_variants():
        print(f"{vid:9} {abp.resource_path(vid + '.csm')}  {desc}", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="csmverify", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("model", type=Path, help="model file (.csm)")
        sp.add_argument("--cap", type=int, default=DEFAULT_CAP, help="node cap for graph construction")
        sp.add_argument("--records", action="store_true", help="emit JSON lines instead of text")

    c = sub.add_parser("check", help="evaluate a formula script against a model")
    common(c)
    c.add_argument("script", type=Path, help="formula script (.tl)")
    c.add_argument("--semantics", choices=("universal", "fair"), default=None,
                   help="path quantifier semantics; default is what the script declares")

    g = sub.add_parser("graph", help="build the reachability graph")
    common(g)
    g.add_argument("--stats", action="store_true", help="print node, edge and sink counts")
    g.add_argument("--dot", type=Path, default=None, help="write the graph in DOT format")

    sub.add_parser("variants", help="list the bundled ABP fixtures")
    return p


def main(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    if args.command == "variants":
        return cmd_variants(out)
    if args.cap < 1:
        print("error: --cap must be positive", file=err)
        return EXIT_ERROR
    cfg = RunConfig(model=args.model, cap=args.cap, records=args.records)
    if args.command == "check":
        cfg.script = args.script
        cfg.semantics = args.semantics
        return cmd_check(cfg, out, err)
    cfg.stats, cfg.dot = args.stats, args.dot
    return cmd_graph(cfg, out, err)


if __name__ == "__main__":
    sys.exit(main())
