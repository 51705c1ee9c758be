#!/usr/bin/env python3
"""Measure in-process simulator throughput across sensor configurations."""

import argparse
import json
import sys

from navsim.bench import fps_bench
from navsim.sensors import SensorSpec

CONFIGS = {
    "measurements-only": (
        SensorSpec(name="measurements", kind="measurements"),
    ),
    "contact+measurements": (
        SensorSpec(name="contact", kind="contact"),
        SensorSpec(name="measurements", kind="measurements"),
    ),
    "depth-84": (
        SensorSpec(name="depth", kind="depth"),
    ),
    "color+depth-84": (
        SensorSpec(name="color", kind="color"),
        SensorSpec(name="depth", kind="depth"),
    ),
    "full-suite-84": (
        SensorSpec(name="color", kind="color"),
        SensorSpec(name="depth", kind="depth"),
        SensorSpec(name="contact", kind="contact"),
        SensorSpec(name="measurements", kind="measurements"),
    ),
    "all-channels-84": (
        SensorSpec(name="color", kind="color"),
        SensorSpec(name="depth", kind="depth"),
        SensorSpec(name="normal", kind="normal"),
        SensorSpec(name="semantic", kind="semantic"),
        SensorSpec(name="instance", kind="instance"),
        SensorSpec(name="contact", kind="contact"),
        SensorSpec(name="measurements", kind="measurements"),
    ),
    "tiny-1x1": (
        SensorSpec(name="depth", kind="depth", resolution=(1, 1)),
        SensorSpec(name="measurements", kind="measurements"),
    ),
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=4000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=None)
    args = parser.parse_args(argv)

    results = {}
    for name, specs in CONFIGS.items():
        rate = fps_bench(specs, args.steps, seed=args.seed)
        results[name] = rate
        print(f"{name:<22s} {rate:8.0f} steps/s", flush=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump({"steps": args.steps, "rates": results}, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
