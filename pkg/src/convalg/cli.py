"""Command-line front end: batch computations with reproducible JSON reports.

Subcommands: lpa (mul | star | verify-relations), conv (compare), gpd
(convolve | decompose | equiv-check), hecke (compose | star | assoc-sweep),
norm.  Reports are emitted as JSON with sorted keys; identical inputs and
seeds produce byte-identical reports.

Exit codes: 0 all checks pass, 1 a check failed, 2 parse error (with line
numbers for file inputs), 3 precondition error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import re
import sys
from typing import Dict, List, Optional, Tuple

from . import __version__
from . import convcat, equivcore, graphtopos as gt, hecke as hk, leavitt as lv, norms
from . import finitegroupoid as fg
from .finitegroupoid import DegenerateModuleError, FiniteGroupoid, GroupoidError
from .hecke import HeckeError, HeckeRingError, TowerElement
from .scalars import QI, QQ, Ring, Scalar, ScalarError, ZZ, parse_scalar, z_localized, one
from .stonelocale import Graph, GraphError

EXIT_PASS = 0
EXIT_CHECK_FAILED = 1
EXIT_PARSE = 2
EXIT_PRECONDITION = 3


class CliParseError(ValueError):
    pass


class CliPreconditionError(ValueError):
    pass


def parse_ring(text: str) -> Ring:
    t = text.strip()
    if t == "Z":
        return ZZ
    if t == "Q":
        return QQ
    if t in ("Q(i)", "Qi"):
        return QI
    m = re.fullmatch(r"Z\[1/(\d+)\]", t)
    if m:
        try:
            return z_localized(int(m.group(1)))
        except ScalarError as exc:
            raise CliPreconditionError(str(exc))
    raise CliParseError(f"unknown ring {text!r}; use Z, Q, Z[1/p] or Q(i)")


# -- file formats -------------------------------------------------------------


def parse_graph_file(path: str) -> Graph:
    vertices: List[str] = []
    edges: List[Tuple[str, str, str]] = []
    seen = set()
    try:
        lines = open(path, "r", encoding="utf-8").read().splitlines()
    except OSError as exc:
        raise CliParseError(f"{path}: {exc}")
    for no, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "vertex" and len(parts) == 2:
            if parts[1] in seen:
                raise CliParseError(f"{path}:{no}: duplicate name {parts[1]}")
            seen.add(parts[1])
            vertices.append(parts[1])
        elif parts[0] == "edge" and len(parts) == 4:
            name, s, t = parts[1], parts[2], parts[3]
            if name in seen:
                raise CliParseError(f"{path}:{no}: duplicate name {name}")
            if s not in vertices or t not in vertices:
                raise CliParseError(f"{path}:{no}: edge {name} references undeclared vertex")
            seen.add(name)
            edges.append((name, s, t))
        else:
            raise CliParseError(f"{path}:{no}: expected `vertex NAME` or `edge NAME SRC TGT`")
    try:
        return Graph(vertices, edges)
    except GraphError as exc:
        raise CliParseError(f"{path}: {exc}")


def parse_groupoid_file(path: str) -> FiniteGroupoid:
    objects: List[str] = []
    arrows: List[str] = []
    src: Dict[str, str] = {}
    tgt: Dict[str, str] = {}
    comp: Dict[Tuple[str, str], str] = {}
    try:
        lines = open(path, "r", encoding="utf-8").read().splitlines()
    except OSError as exc:
        raise CliParseError(f"{path}: {exc}")
    for no, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "object" and len(parts) == 2:
            objects.append(parts[1])
        elif parts[0] == "arrow" and len(parts) == 4:
            name, s, t = parts[1], parts[2], parts[3]
            if s not in objects or t not in objects:
                raise CliParseError(f"{path}:{no}: arrow {name} references undeclared object")
            arrows.append(name)
            src[name] = s
            tgt[name] = t
        elif parts[0] == "compose" and len(parts) == 4:
            a, b, c = parts[1], parts[2], parts[3]
            for x in (a, b, c):
                if x not in src:
                    raise CliParseError(f"{path}:{no}: unknown arrow {x}")
            comp[(a, b)] = c
        else:
            raise CliParseError(f"{path}:{no}: expected object/arrow/compose line")
    try:
        return FiniteGroupoid(objects, arrows, src, tgt, comp, name=os.path.basename(path))
    except GroupoidError as exc:
        raise CliParseError(f"{path}: {exc}")


# -- element grammars ----------------------------------------------------------


_FACTOR_RE = re.compile(r"^(v|w)\[([\w.]*)\]$|^p\[(\w+)\]$")


def parse_lpa_element(g: Graph, ring: Ring, text: str) -> lv.LpaElement:
    """Terms like `2 * v[a.b] * w[c]`, `-1/2 * p[x]`, joined by `+`."""
    total = lv.LpaElement.zero_element(g, ring)
    for term in text.split("+"):
        term = term.strip()
        if not term:
            raise CliParseError(f"empty term in {text!r}")
        factors = [f.strip() for f in term.split("*")]
        acc = lv.unit_element(g, ring)
        coeff = one(ring)
        for k, f in enumerate(factors):
            m = _FACTOR_RE.match(f)
            if m is None:
                if k == 0:
                    try:
                        coeff = parse_scalar(ring, f)
                        continue
                    except ScalarError as exc:
                        raise CliParseError(f"bad coefficient {f!r}: {exc}")
                raise CliParseError(f"bad factor {f!r} in {text!r}")
            if m.group(3) is not None:
                x = m.group(3)
                if x not in g.vertices:
                    raise CliParseError(f"unknown vertex {x!r}")
                acc = lv.lpa_mul(acc, lv.p_vertex(g, ring, x))
            else:
                kind, body = m.group(1), m.group(2)
                path = tuple(e for e in body.split(".") if e)
                for e in path:
                    if e not in g.edge_names:
                        raise CliParseError(f"unknown edge {e!r}")
                el = lv.unit_element(g, ring)
                seq = path if kind == "w" else tuple(reversed(path))
                for e in seq:
                    factor = lv.v_star_edge(g, ring, e) if kind == "w" else lv.v_edge(g, ring, e)
                    el = lv.lpa_mul(el, factor)
                acc = lv.lpa_mul(acc, el)
        total = total.add(acc.scale(coeff))
    return total


def parse_gpd_element(gpd: FiniteGroupoid, ring: Ring, text: str) -> fg.GpdElement:
    """Terms like `2 * d[arrow]` joined by `+`."""
    acc: Dict[str, Scalar] = {}
    for term in text.split("+"):
        term = term.strip()
        if "*" in term:
            coeff_text, rest = term.split("*", 1)
            try:
                coeff = parse_scalar(ring, coeff_text.strip())
            except ScalarError as exc:
                raise CliParseError(f"bad coefficient in {term!r}: {exc}")
        else:
            coeff, rest = one(ring), term
        m = re.fullmatch(r"d\[(\w+)\]", rest.strip())
        if not m:
            raise CliParseError(f"bad groupoid term {term!r}")
        a = m.group(1)
        if a not in gpd.arrows:
            raise CliParseError(f"unknown arrow {a!r}")
        acc[a] = acc.get(a, coeff - coeff) + coeff
    return fg.GpdElement.make(gpd, ring, acc)


_TOWER_RE = re.compile(r"^(?:p=(\d+)\s+)?k=(\d+)->(\d+)\s*\[(.*)\]$")


def parse_tower_element(p: int, ring: Ring, text: str) -> TowerElement:
    """Form `p=2 k=1->0 [c0, c1, ...]`; the p prefix must match the CLI flag."""
    m = _TOWER_RE.match(text.strip())
    if not m:
        raise CliParseError(f"bad tower element {text!r}; want `[p=P] k=K->K' [c0, c1, ...]`")
    if m.group(1) is not None and int(m.group(1)) != p:
        raise CliParseError(f"element prime p={m.group(1)} conflicts with --p {p}")
    k_src, k_tgt = int(m.group(2)), int(m.group(3))
    body = m.group(4).strip()
    vals = [parse_scalar(ring, v) for v in body.split(",")] if body else []
    try:
        return TowerElement(p, k_src, k_tgt, ring, tuple(vals))
    except HeckeRingError as exc:
        raise CliPreconditionError(str(exc))
    except HeckeError as exc:
        raise CliParseError(str(exc))


# -- report assembly -------------------------------------------------------------


def file_digest(path: str) -> Dict[str, str]:
    data = open(path, "rb").read()
    return {"name": os.path.basename(path), "sha256": hashlib.sha256(data).hexdigest()}


def make_report(command: List[str], inputs: Dict, params: Dict, results: Dict, checks: List[Dict]) -> Dict:
    status = "pass" if all(c["pass"] for c in checks) else "fail"
    if not checks:
        status = "ok"
    return {
        "tool": "convalg",
        "version": __version__,
        "command": command,
        "inputs": inputs,
        "params": params,
        "results": results,
        "checks": checks,
        "status": status,
    }


def emit(report: Dict, out: Optional[str]) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _status_code(report: Dict) -> int:
    return EXIT_PASS if report["status"] in ("pass", "ok") else EXIT_CHECK_FAILED


# -- subcommand bodies -------------------------------------------------------------


def relation_checks(g: Graph, ring: Ring) -> List[Dict]:
    """The four defining relations, exactly, in both engines."""
    checks = []

    def record(name: str, ok: bool):
        checks.append({"name": name, "pass": bool(ok)})

    for x in g.vertices:
        for y in g.vertices:
            lhs = lv.lpa_mul(lv.p_vertex(g, ring, x), lv.p_vertex(g, ring, y))
            want = lv.p_vertex(g, ring, x) if x == y else lv.LpaElement.zero_element(g, ring)
            c_lhs = gt.conv_mul(gt.conv_p(g, ring, x), gt.conv_p(g, ring, y)) if x == y else None
            ok = lv.lpa_equal(lhs, want)
            if x == y and c_lhs is not None:
                ok = ok and gt.to_leavitt(c_lhs).terms == want.terms
            record(f"projection[{x},{y}]", ok)
    for a in g.edge_names:
        va = lv.v_edge(g, ring, a)
        lhs1 = lv.lpa_mul(va, lv.p_vertex(g, ring, g.src[a]))
        lhs2 = lv.lpa_mul(lv.p_vertex(g, ring, g.tgt[a]), va)
        cva = gt.conv_v(g, ring, a)
        clhs1 = gt.conv_mul(cva, gt.conv_p(g, ring, g.src[a]))
        clhs2 = gt.conv_mul(gt.conv_p(g, ring, g.tgt[a]), cva)
        ok = (
            lv.lpa_equal(lhs1, va)
            and lv.lpa_equal(lhs2, va)
            and clhs1.terms == cva.terms
            and clhs2.terms == cva.terms
        )
        record(f"unit-absorption[{a}]", ok)
    for a in g.edge_names:
        for b in g.edge_names:
            lhs = lv.lpa_mul(lv.v_star_edge(g, ring, a), lv.v_edge(g, ring, b))
            want = (
                lv.p_vertex(g, ring, g.src[a]) if a == b else lv.LpaElement.zero_element(g, ring)
            )
            ok = lv.lpa_equal(lhs, want)
            if g.tgt[a] == g.tgt[b]:  # composable in the pseudo-category
                clhs = gt.conv_mul(gt.conv_v_star(g, ring, a), gt.conv_v(g, ring, b))
                cwant = gt.conv_p(g, ring, g.src[a]) if a == b else None
                ok = ok and (clhs.terms == (cwant.terms if cwant else ()))
            record(f"contraction[{a},{b}]", ok)
    for x in g.vertices:
        acc = lv.LpaElement.zero_element(g, ring)
        cacc = gt.ConvElement.zero_element(g, ring, x, x)
        for a in g.edges_into[x]:
            acc = acc.add(lv.lpa_mul(lv.v_edge(g, ring, a), lv.v_star_edge(g, ring, a)))
            cacc = cacc.add(gt.conv_mul(gt.conv_v(g, ring, a), gt.conv_v_star(g, ring, a)))
        ok = lv.lpa_equal(acc, lv.p_vertex(g, ring, x)) and cacc.terms == gt.conv_p(g, ring, x).terms
        record(f"refinement[{x}]", ok)
    return checks


def cmd_lpa(args) -> int:
    g = parse_graph_file(args.graph)
    ring = parse_ring(args.ring)
    inputs = {"graph": file_digest(args.graph)}
    params = {"ring": ring.name}
    if args.subcommand == "verify-relations":
        checks = relation_checks(g, ring)
        report = make_report(["lpa", "verify-relations"], inputs, params, {}, checks)
    elif args.subcommand == "mul":
        u = parse_lpa_element(g, ring, args.elements[0])
        v = parse_lpa_element(g, ring, args.elements[1])
        report = make_report(
            ["lpa", "mul"] + list(args.elements), inputs, params,
            {"product": str(lv.lpa_mul(u, v))}, [],
        )
    else:  # star
        u = parse_lpa_element(g, ring, args.elements[0])
        report = make_report(
            ["lpa", "star"] + list(args.elements), inputs, params,
            {"star": str(lv.lpa_star(u))}, [],
        )
    emit(report, args.out)
    return _status_code(report)


def cmd_conv(args) -> int:
    g = parse_graph_file(args.graph)
    ring = parse_ring(args.ring)
    rng = random.Random(args.seed)
    mismatch = None
    for case in range(args.count):
        word = gt.random_generator_word(g, ring, rng, args.maxlen)
        acc_conv = word[0]
        acc_lpa = gt.to_leavitt(word[0])
        for h in word[1:]:
            acc_conv = gt.conv_mul(acc_conv, h)
            acc_lpa = lv.lpa_mul(acc_lpa, gt.to_leavitt(h))
        if gt.to_leavitt(acc_conv).terms != acc_lpa.terms:
            mismatch = {"case": case, "word": [str(w) for w in word]}
            break
    checks = [{"name": f"dual-engine agreement ({args.count} cases)", "pass": mismatch is None}]
    results = {"first_mismatch": mismatch} if mismatch else {"cases": args.count}
    report = make_report(
        ["conv", "compare"], {"graph": file_digest(args.graph)},
        {"ring": ring.name, "seed": args.seed, "count": args.count, "maxlen": args.maxlen},
        results, checks,
    )
    emit(report, args.out)
    return _status_code(report)


def cmd_gpd(args) -> int:
    gpd = parse_groupoid_file(args.groupoid)
    ring = parse_ring(args.ring)
    inputs = {"groupoid": file_digest(args.groupoid)}
    params = {"ring": ring.name}
    if args.subcommand == "convolve":
        f = parse_gpd_element(gpd, ring, args.elements[0])
        h = parse_gpd_element(gpd, ring, args.elements[1])
        report = make_report(
            ["gpd", "convolve"] + list(args.elements), inputs, params,
            {"product": str(fg.gpd_convolve(f, h))}, [],
        )
    elif args.subcommand == "decompose":
        dec = fg.decompose(gpd)
        results = {
            "orbits": [
                {
                    "objects": list(d.objects),
                    "base": d.base,
                    "isotropy_order": len(d.isotropy),
                    "isotropy": list(d.isotropy),
                }
                for d in dec
            ]
        }
        report = make_report(["gpd", "decompose"], inputs, params, results, [])
    else:  # equiv-check
        checks = []
        try:
            wit = equivcore.verify_groupoid_equivalence(gpd, ring, args.seed, cases=args.count)
            checks.append({"name": f"unit/counit witnesses ({args.count} cases)", "pass": True})
            results = {
                "units": len(wit.units),
                "counits": len(wit.counits),
                "naturality_squares": wit.naturality_checked,
            }
        except equivcore.EquivError as exc:
            checks.append({"name": "unit/counit witnesses", "pass": False})
            results = {"failure": str(exc)}
        rng = random.Random(args.seed)
        try:
            bad = equivcore.degenerate_groupoid_module(gpd, ring, rng)
            fg.functor_T(bad)
            checks.append({"name": "degenerate module rejected", "pass": False})
        except DegenerateModuleError:
            checks.append({"name": "degenerate module rejected", "pass": True})
        params = {"ring": ring.name, "seed": args.seed, "count": args.count}
        report = make_report(["gpd", "equiv-check"], inputs, params, results, checks)
    emit(report, args.out)
    return _status_code(report)


def cmd_hecke(args) -> int:
    ring = parse_ring(args.ring)
    try:
        if args.subcommand == "compose":
            f = parse_tower_element(args.p, ring, args.elements[0])
            h = parse_tower_element(args.p, ring, args.elements[1])
            if f.k_tgt != h.k_src:
                raise CliPreconditionError(f"level mismatch: {f.k_tgt} vs {h.k_src}")
            prod = hk.hecke_compose(f, h)
            oracle = hk.compose_oracle(f, h)
            checks = [{"name": "oracle agreement", "pass": prod.values == oracle.values}]
            report = make_report(
                ["hecke", "compose"] + list(args.elements), {},
                {"ring": ring.name, "p": args.p}, {"product": str(prod)}, checks,
            )
        elif args.subcommand == "star":
            f = parse_tower_element(args.p, ring, args.elements[0])
            report = make_report(
                ["hecke", "star"] + list(args.elements), {},
                {"ring": ring.name, "p": args.p}, {"star": str(hk.hecke_star(f))}, [],
            )
        else:  # assoc-sweep
            _check_hecke_ring(ring, args.p)
            bad = None
            total = 0
            lv_range = range(args.levels + 1)
            for k0 in lv_range:
                for k1 in lv_range:
                    for k2 in lv_range:
                        for k3 in lv_range:
                            for f in hk.basis(args.p, k0, k1, ring):
                                for gg in hk.basis(args.p, k1, k2, ring):
                                    fg_ = hk.hecke_compose(f, gg)
                                    for h in hk.basis(args.p, k2, k3, ring):
                                        total += 1
                                        lhs = hk.hecke_compose(fg_, h)
                                        rhs = hk.hecke_compose(f, hk.hecke_compose(gg, h))
                                        if lhs.values != rhs.values:
                                            bad = (str(f), str(gg), str(h))
            checks = [{"name": f"associativity on {total} basis triples", "pass": bad is None}]
            results = {"triples": total}
            if bad:
                results["counterexample"] = list(bad)
            report = make_report(
                ["hecke", "assoc-sweep"], {},
                {"ring": ring.name, "p": args.p, "levels": args.levels}, results, checks,
            )
    except HeckeRingError as exc:
        raise CliPreconditionError(str(exc))
    emit(report, args.out)
    return _status_code(report)


def _check_hecke_ring(ring: Ring, p: int):
    from .scalars import inv_nat

    if inv_nat(ring, p) is None:
        raise HeckeRingError(f"{ring.name} does not invert {p}")


def cmd_norm(args) -> int:
    ring = parse_ring(args.ring)
    if args.groupoid:
        gpd = parse_groupoid_file(args.groupoid)
        family = convcat.GroupoidFamily(gpd, ring)
        el = family.wrap(parse_gpd_element(gpd, ring, args.element))
        inputs = {"groupoid": file_digest(args.groupoid)}
    elif args.graph:
        g = parse_graph_file(args.graph)
        ring_ok = ring
        u = parse_lpa_element(g, ring_ok, args.element)
        parts = gt.from_leavitt(u)
        if len(parts) > 1:
            raise CliPreconditionError("element mixes anchor components; norms need one component")
        family = convcat.GraphFamily(g, ring_ok)
        if parts:
            el = family.wrap(next(iter(parts.values())))
        else:
            el = family.zero(g.vertices[0], g.vertices[0])
        inputs = {"graph": file_digest(args.graph)}
    else:
        raise CliPreconditionError("norm needs --graph or --groupoid")
    try:
        report_data = norms.norm_report(el, args.depth)
    except convcat.DepthError as exc:
        raise CliPreconditionError(str(exc))
    which = args.which
    results = report_data.as_dict()
    if which != "all":
        key = {"i": "i_norm", "reduced": "reduced_norm", "max": "max_norm_bound"}[which]
        results = {key: results[key], "depth": results["depth"]}
    checks = [{"name": "reduced <= min(I, max-bound) + 1e-9", "pass": report_data.ordering_ok()}]
    report = make_report(
        ["norm", args.element], inputs,
        {"ring": ring.name, "depth": args.depth, "which": which}, results, checks,
    )
    emit(report, args.out)
    return _status_code(report)


# -- argument wiring -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="convalg", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p, graph=False, groupoid=False):
        p.add_argument("--ring", default="Q", help="Z | Q | Z[1/p] | Q(i)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--count", type=int, default=100)
        p.add_argument("--depth", type=int, default=3)
        p.add_argument("--out", default=None, help="write the JSON report here")
        if graph:
            p.add_argument("--graph", required=True)
        if groupoid:
            p.add_argument("--groupoid", required=True)

    p_lpa = sub.add_parser("lpa", help="Leavitt engine")
    common(p_lpa, graph=True)
    p_lpa.add_argument("subcommand", choices=["mul", "star", "verify-relations"])
    p_lpa.add_argument("elements", nargs="*")
    p_lpa.set_defaults(func=cmd_lpa)

    p_conv = sub.add_parser("conv", help="dual-engine comparison")
    common(p_conv, graph=True)
    p_conv.add_argument("subcommand", choices=["compare"])
    p_conv.add_argument("--maxlen", type=int, default=5)
    p_conv.set_defaults(func=cmd_conv)

    p_gpd = sub.add_parser("gpd", help="groupoid convolution algebra")
    common(p_gpd, groupoid=True)
    p_gpd.add_argument("subcommand", choices=["convolve", "decompose", "equiv-check"])
    p_gpd.add_argument("elements", nargs="*")
    p_gpd.set_defaults(func=cmd_gpd)

    p_hecke = sub.add_parser("hecke", help="double-coset tower")
    common(p_hecke)
    p_hecke.add_argument("--p", type=int, required=True)
    p_hecke.add_argument("--levels", type=int, default=3)
    p_hecke.add_argument("subcommand", choices=["compose", "star", "assoc-sweep"])
    p_hecke.add_argument("elements", nargs="*")
    p_hecke.set_defaults(func=cmd_hecke)

    p_norm = sub.add_parser("norm", help="norm report for one element")
    common(p_norm)
    p_norm.add_argument("--graph", default=None)
    p_norm.add_argument("--groupoid", default=None)
    p_norm.add_argument("--which", choices=["i", "reduced", "max", "all"], default="all")
    p_norm.add_argument("element")
    p_norm.set_defaults(func=cmd_norm)
    return ap


def _element_count_ok(args) -> Optional[str]:
    need = {
        ("lpa", "mul"): 2,
        ("lpa", "star"): 1,
        ("lpa", "verify-relations"): 0,
        ("gpd", "convolve"): 2,
        ("gpd", "decompose"): 0,
        ("gpd", "equiv-check"): 0,
        ("hecke", "compose"): 2,
        ("hecke", "star"): 1,
        ("hecke", "assoc-sweep"): 0,
    }
    key = (args.cmd, getattr(args, "subcommand", None))
    if key in need and len(getattr(args, "elements", [])) != need[key]:
        return f"{key[0]} {key[1]} takes exactly {need[key]} element argument(s)"
    return None


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    msg = _element_count_ok(args)
    if msg:
        sys.stderr.write(f"error: {msg}\n")
        return EXIT_PARSE
    try:
        return args.func(args)
    except CliParseError as exc:
        sys.stderr.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    except (CliPreconditionError, HeckeRingError) as exc:
        sys.stderr.write(f"precondition error: {exc}\n")
        return EXIT_PRECONDITION
    except (ScalarError, GraphError, GroupoidError, lv.LpaError, gt.ConvError, HeckeError) as exc:
        sys.stderr.write(f"precondition error: {exc}\n")
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
