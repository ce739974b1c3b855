#!/usr/bin/env python3
"""Run the fig1-fig2 pipeline into an output directory and print the report.

Usage: python3 scripts/run_reproduce.py [out_dir]
"""

import sys
from pathlib import Path

from trihalo.pipeline import run_fig1_fig2


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out/fig1-fig2")
    summary = run_fig1_fig2(out, svg=True)
    print(summary["report_path"].read_text(), end="")
    print(f"artifacts in {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
