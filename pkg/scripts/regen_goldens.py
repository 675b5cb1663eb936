#!/usr/bin/env python3
"""Regenerate the golden CLI reports under tests/goldens/.

Every CLI path is pinned by at least one golden file; the test suite replays
these invocations and requires byte-identical output.
"""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from convalg.cli import main  # noqa: E402

HERE = os.path.dirname(os.path.abspath(__file__))
FIXTURES = os.path.join(HERE, "..", "tests", "fixtures")
GOLDENS = os.path.join(HERE, "..", "tests", "goldens")


def fx(name):
    return os.path.join(FIXTURES, name)


GOLDEN_COMMANDS = {
    "lpa_verify_twoloop.json": ["lpa", "--graph", fx("twoloop.graph"), "verify-relations"],
    "lpa_verify_line.json": ["lpa", "--graph", fx("line.graph"), "verify-relations"],
    "lpa_mul_oneloop.json": ["lpa", "--graph", fx("oneloop.graph"), "mul", "v[e]", "v[e]"],
    "lpa_star_twoloop.json": ["lpa", "--graph", fx("twoloop.graph"), "star", "2 * v[a] * w[b]"],
    "conv_compare_twoloop.json": [
        "conv", "--graph", fx("twoloop.graph"), "compare", "--seed", "3", "--count", "100",
    ],
    "conv_compare_count0.json": [
        "conv", "--graph", fx("threecycle.graph"), "compare", "--seed", "1", "--count", "0",
    ],
    "gpd_decompose_z2.json": ["gpd", "--groupoid", fx("z2.gpd"), "decompose"],
    "gpd_convolve_pair2.json": [
        "gpd", "--groupoid", fx("pair2.gpd"), "convolve", "d[a12]", "d[a21]",
    ],
    "gpd_equiv_pair2.json": [
        "gpd", "--groupoid", fx("pair2.gpd"), "equiv-check", "--seed", "11", "--count", "4",
    ],
    "hecke_compose_p2.json": [
        "hecke", "--p", "2", "compose", "k=1->1 [0, 1]", "k=1->1 [0, 1]",
    ],
    "hecke_star_p2.json": ["hecke", "--p", "2", "star", "p=2 k=2->1 [1, -2]"],
    "hecke_sweep_p2.json": ["hecke", "--p", "2", "--levels", "2", "assoc-sweep"],
    "norm_pair2.json": ["norm", "--groupoid", fx("pair2.gpd"), "d[a11] + d[a12]"],
    "norm_graph_twoloop.json": [
        "norm", "--graph", fx("twoloop.graph"), "--depth", "3", "v[a] + v[b]",
    ],
}


def main_():
    os.makedirs(GOLDENS, exist_ok=True)
    for name, argv in GOLDEN_COMMANDS.items():
        out = os.path.join(GOLDENS, name)
        code = main(argv + ["--out", out])
        status = "ok" if code == 0 else f"exit {code}"
        print(f"{name}: {status}")


if __name__ == "__main__":
    main_()
