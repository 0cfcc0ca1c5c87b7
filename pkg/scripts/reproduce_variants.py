"""Run every bundled ABP variant and summarize graph sizes and verdicts.

Usage: python scripts/reproduce_variants.py [--semantics universal|fair] [--verbose]

Without --semantics each script runs under the semantics it declares.
"""

import argparse
import time

from csmverify import abp
from csmverify.checker import render_command, run_script
from csmverify.reachability import graph_stats


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--semantics", choices=("universal", "fair"), default=None)
    ap.add_argument("--verbose", action="store_true", help="print every command with its result")
    args = ap.parse_args()
    fair = None if args.semantics is None else args.semantics == "fair"

    print(f"{'variant':9} {'nodes':>5} {'edges':>5} {'sinks':>5} {'cmds':>4} {'as expected':>11} {'time':>6}")
    failures = 0
    for variant, desc in abp.list_variants():
        fx = abp.load_variant(variant)
        start = time.perf_counter()
        graph = fx.graph()
        results = run_script(graph, fx.script(), fair=fair)
        elapsed = time.perf_counter() - start
        stats = graph_stats(graph)
        good = sum(r.matches_expectation for r in results)
        failures += len(results) - good
        print(f"{variant:9} {stats['nodes']:5} {stats['edges']:5} {stats['sinks']:5} "
              f"{len(results):4} {good:>6}/{len(results):<4} {elapsed:5.2f}s")
        if args.verbose:
            print(f"  {desc}")
            for r in results:
                flag = "" if r.matches_expectation else "   <-- unexpected"
                for line in render_command(graph, r):
                    print("    " + line)
                print(flag)
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
