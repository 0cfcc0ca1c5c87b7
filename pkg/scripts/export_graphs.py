"""Write the reachability graph of every bundled variant as a DOT file.

Usage: python scripts/export_graphs.py OUTDIR

Render with Graphviz, e.g. ``dot -Tsvg OUTDIR/A.dot -o A.svg``.
"""

import sys
from pathlib import Path

from csmverify import abp
from csmverify.reachability import export_dot


def main(argv: list[str]) -> int:
    if len(argv) != 1:
        print(__doc__, file=sys.stderr)
        return 2
    out = Path(argv[0])
    out.mkdir(parents=True, exist_ok=True)
    for variant, _ in abp.list_variants():
        graph = abp.load_variant(variant).graph()
        path = out / f"{variant}.dot"
        path.write_text(export_dot(graph), encoding="utf-8")
        print(f"{path}: {len(graph)} nodes")
    return 0


if __name__ == "__main__":
    raise SystemExit(main(sys.argv[1:]))
