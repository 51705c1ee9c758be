#!/usr/bin/env python3
"""Reproduce the qualitative benchmark tables at desk scale.

Runs the scripted baselines over the four published procedural suites and
prints one merged table: the random-policy difficulty trend across
empty/furnished x small/medium conditions, and the greedy (measurements-
driven) dominance over random on single-room suites.

Absolute success rates depend on scene statistics and policy quality; the
qualitative trends across clutter and size are the target.
"""

import argparse
import json
import sys
import time

from navsim.bench import SUITES, BenchmarkReport, run_suite

CONDITIONS = ("empty-small", "furnished-small", "empty-medium", "furnished-medium")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--episodes", type=int, default=25,
                        help="episodes per scene (25 x 20 scenes = 500/condition)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--policies", nargs="+",
                        default=["random", "greedy", "forward_bump"])
    parser.add_argument("--out", default=None, help="write merged report JSON")
    args = parser.parse_args(argv)

    rows = []
    failures = []
    t0 = time.perf_counter()
    for policy in args.policies:
        for name in CONDITIONS:
            report = run_suite(SUITES[name], policy,
                               episodes_per_scene=args.episodes, seed=args.seed)
            rows.extend(report.rows)
            failures.extend(report.failures)
            row = report.rows[0]
            print(f"{policy:>13s} | {name:<17s} success {row['success']:5.1f}%  "
                  f"speed {row['speed']:5.1f}%  ({row['episodes']} episodes)",
                  flush=True)
    elapsed = time.perf_counter() - t0

    merged = BenchmarkReport(rows=rows, runtime={"elapsed_s": elapsed,
                                                 "steps": None,
                                                 "episodes": sum(r["episodes"] for r in rows),
                                                 "steps_per_s": None},
                             failures=failures)
    print()
    print(merged.table())
    print(f"total wall time: {elapsed:.0f} s")

    random_rates = {r["suite"]: r["success"] for r in rows if r["policy"] == "random"}
    if len(random_rates) == len(CONDITIONS):
        chain = [random_rates[c] for c in CONDITIONS]
        monotone = all(b <= a + 3.0 for a, b in zip(chain, chain[1:]))
        print(f"random-policy difficulty trend non-increasing (3 pp tol): "
              f"{'yes' if monotone else 'NO'}")

    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(merged.to_json(), fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
