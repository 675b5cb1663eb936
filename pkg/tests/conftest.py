import os

import pytest

from convalg import finitegroupoid as fg
from convalg.stonelocale import Graph

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "fixtures")
GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "goldens")


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURE_DIR, name)


# -- fixture graphs (all at most 3 vertices / 4 edges) -----------------------


def make_fixture_graphs():
    return {
        "oneloop": Graph(["x"], [("e", "x", "x")]),
        "twoloop": Graph(["x"], [("a", "x", "x"), ("b", "x", "x")]),
        "rose3": Graph(["x"], [("a", "x", "x"), ("b", "x", "x"), ("c", "x", "x")]),
        "twocycle": Graph(["x", "y"], [("a", "x", "y"), ("b", "y", "x")]),
        "threecycle": Graph(
            ["x", "y", "z"], [("a", "x", "y"), ("b", "y", "z"), ("c", "z", "x")]
        ),
        "mixed": Graph(["x", "y"], [("l", "x", "x"), ("a", "x", "y")]),
        "line": Graph(["u", "v", "w"], [("a", "u", "v"), ("b", "v", "w")]),
        "twoloop_tail": Graph(
            ["x", "y"], [("a", "x", "x"), ("b", "x", "x"), ("c", "x", "y")]
        ),
    }


@pytest.fixture(scope="session")
def graphs():
    return make_fixture_graphs()


# -- fixture groupoids (all at most 8 arrows) --------------------------------


def klein_four_groupoid():
    elems = ["e", "i", "j", "k"]

    def mult(a, b):
        if a == "e":
            return b
        if b == "e":
            return a
        if a == b:
            return "e"
        return next(c for c in ("i", "j", "k") if c not in (a, b))

    arrows = [f"g{e}" for e in elems]
    src = {a: "o" for a in arrows}
    tgt = {a: "o" for a in arrows}
    comp = {(f"g{a}", f"g{b}"): f"g{mult(a, b)}" for a in elems for b in elems}
    return fg.FiniteGroupoid(["o"], arrows, src, tgt, comp, "klein")


def pair_with_z2_isotropy():
    objects = ["o1", "o2"]
    arrows = []
    src = {}
    tgt = {}
    for i in (1, 2):
        for j in (1, 2):
            for h in (0, 1):
                a = f"m{i}{j}h{h}"  # oj -> oi carrying the group element h
                arrows.append(a)
                src[a] = f"o{j}"
                tgt[a] = f"o{i}"
    comp = {}
    for i in (1, 2):
        for j in (1, 2):
            for k in (1, 2):
                for h in (0, 1):
                    for h2 in (0, 1):
                        comp[(f"m{i}{j}h{h}", f"m{j}{k}h{h2}")] = f"m{i}{k}h{(h + h2) % 2}"
    return fg.FiniteGroupoid(objects, arrows, src, tgt, comp, "pairZ2")


def make_fixture_groupoids():
    return {
        "trivial": fg.discrete_groupoid(1),
        "z2": fg.cyclic_group_groupoid(2),
        "z4": fg.cyclic_group_groupoid(4),
        "klein": klein_four_groupoid(),
        "pair2": fg.pair_groupoid(2),
        "z2_plus_point": fg.disjoint_union(
            fg.cyclic_group_groupoid(2), fg.discrete_groupoid(1)
        ),
        "pair_z2": pair_with_z2_isotropy(),
    }


@pytest.fixture(scope="session")
def groupoids():
    return make_fixture_groupoids()
