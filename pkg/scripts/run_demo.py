#!/usr/bin/env python3
"""Run the full pipeline on the bundled mini corpus and print the eval report.

Usage: python3 scripts/run_demo.py [work_dir]
"""

import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
CONFIG = ROOT / "fixtures" / "mini_corpus" / "config.ini"
COMMANDS = ("preprocess", "index", "retrieve", "features", "train", "rank", "postprocess", "evaluate")


def main() -> int:
    work = sys.argv[1] if len(sys.argv) > 1 else str(ROOT / "work")
    for command in COMMANDS:
        print(f"== {command} ==")
        result = subprocess.run(
            [sys.executable, "-m", "legalir.cli", command,
             "--config", str(CONFIG), "--stage-dir", work],
            cwd=ROOT,
        )
        if result.returncode != 0:
            return result.returncode
    print(f"\nstage files in {work}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
