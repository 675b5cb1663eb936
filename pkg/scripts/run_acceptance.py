#!/usr/bin/env python3
"""Run the acceptance suite with its per-criterion pass/fail lines visible."""

import os
import subprocess
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
ROOT = os.path.join(HERE, "..")

if __name__ == "__main__":
    sys.exit(
        subprocess.call(
            [sys.executable, "-m", "pytest", "tests/test_acceptance.py", "-v", "-s"]
            + sys.argv[1:],
            cwd=ROOT,
        )
    )
