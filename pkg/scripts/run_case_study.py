#!/usr/bin/env python3
"""Run the bundled warez-download case end to end and show the report.

Writes every pipeline artifact to the output directory, then prints the text
timeline so the reconstruction can be read directly in the terminal.
"""
from __future__ import annotations

import argparse
import os
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parents[1]
if str(ROOT / "src") not in sys.path:
    sys.path.insert(0, str(ROOT / "src"))

from retrace import load_config
from retrace.pipeline import run_all


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--config",
        default=str(ROOT / "cases" / "demo" / "case.toml"),
        help="case configuration document (default: the bundled demo case)",
    )
    parser.add_argument("--out", default=None, help="output directory override")
    parser.add_argument(
        "--quiet", action="store_true", help="only list artifacts, skip the report body"
    )
    args = parser.parse_args()

    config = load_config(args.config)
    written = run_all(config, args.out)
    for path in written:
        print(f"wrote {path}")
    if not args.quiet:
        report = next(p for p in written if p.endswith("timeline.txt"))
        print()
        print(open(report, encoding="utf-8").read(), end="")
    return 0


if __name__ == "__main__":
    sys.exit(main())
