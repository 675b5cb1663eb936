#!/usr/bin/env python3
"""A guided tour through the three instance families.

Run from the repository root:  python3 scripts/demo_tour.py
"""

import os
import random
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from convalg import convcat as cc
from convalg import equivcore as eq
from convalg import finitegroupoid as fg
from convalg import graphtopos as gt
from convalg import hecke as hk
from convalg import leavitt as lv
from convalg import norms
from convalg.scalars import QQ
from convalg.stonelocale import Clopen, Graph


def hr(title):
    print(f"\n=== {title} " + "=" * max(0, 60 - len(title)))


def main():
    hr("graph family: one vertex, two loops")
    g = Graph(["x"], [("a", "x", "x"), ("b", "x", "x")])
    va, vb = gt.conv_v(g, QQ, "a"), gt.conv_v(g, QQ, "b")
    vastar = gt.conv_star(va)
    print("v_a           =", va)
    print("v_a* . v_b    =", gt.conv_mul(vastar, vb), "   (edges contract or die)")
    refinement = gt.conv_mul(va, vastar).add(gt.conv_mul(vb, gt.conv_star(vb)))
    print("sum v_e v_e*  =", refinement, "   (the vertex refinement relation)")

    hr("the same algebra as generators and relations")
    u = lv.lpa_mul(lv.v_edge(g, QQ, "a"), lv.v_star_edge(g, QQ, "b"))
    print("v_a v_b*      =", u)
    print("star          =", lv.lpa_star(u))
    rng = random.Random(0)
    f = lv.random_element(g, QQ, rng)
    print("random f      =", f)
    print("f * unit == f :", lv.lpa_equal(lv.lpa_mul(f, lv.unit_element(g, QQ)), f))

    hr("dual engines agree on random words")
    word = gt.random_generator_word(g, QQ, rng, 5)
    acc_conv = word[0]
    acc_lpa = gt.to_leavitt(word[0])
    for h in word[1:]:
        acc_conv = gt.conv_mul(acc_conv, h)
        acc_lpa = lv.lpa_mul(acc_lpa, gt.to_leavitt(h))
    print("word length   =", len(word))
    print("conv engine   =", gt.to_leavitt(acc_conv))
    print("rewriting     =", acc_lpa)

    hr("finite groupoid family: the pair groupoid")
    pg = fg.pair_groupoid(2)
    e12, e21 = fg.delta(pg, QQ, "a12"), fg.delta(pg, QQ, "a21")
    print("e12 * e21     =", fg.gpd_convolve(e12, e21))
    fam = cc.GroupoidFamily(pg, QQ)
    el = fam.wrap(fg.delta(pg, QQ, "a11").add(e12))
    rep = norms.norm_report(el, depth=1)
    print("norms of e11+e12:")
    print(rep)

    hr("sheaf / module equivalence at desk scale")
    wit = eq.verify_groupoid_equivalence(pg, QQ, seed=5, cases=5)
    print(f"unit/counit witnesses for 5+5 random instances: "
          f"{len(wit.units)} units, {len(wit.counits)} counits, "
          f"{wit.naturality_checked} naturality squares")

    hr("double cosets on the 2-adic tower")
    d1 = hk.TowerElement.delta(2, 1, 1, QQ, 1)
    print("delta_1 ^ 2   =", hk.hecke_compose(d1, d1))
    down = hk.TowerElement.make(2, 1, 0, QQ, [1])
    up = hk.TowerElement.make(2, 0, 1, QQ, [1])
    print("down then up  =", hk.hecke_compose(down, up))
    print("oracle        =", hk.compose_oracle(down, up))

    hr("locale layer: partitions of unity")
    from convalg.scalars import scalar
    from convalg.stonelocale import LCSection, partition_of_support

    s = LCSection.make(g, "x", QQ, [((), scalar(QQ, 1))])
    ca, cb = Clopen.make(g, "x", [("a",)]), Clopen.make(g, "x", [("b",)])
    parts = partition_of_support(s, [ca, cb])
    print("1 on the whole space splits as:", " | ".join(str(p) for p in parts))


if __name__ == "__main__":
    main()
