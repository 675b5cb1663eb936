import json
import os
import sys

import pytest

from convalg.cli import main

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "scripts"))
from regen_goldens import GOLDEN_COMMANDS  # noqa: E402

from conftest import GOLDEN_DIR, fixture_path


@pytest.mark.parametrize("name", sorted(GOLDEN_COMMANDS))
def test_golden_reports_byte_identical(name, tmp_path):
    argv = GOLDEN_COMMANDS[name]
    out1 = tmp_path / "run1.json"
    out2 = tmp_path / "run2.json"
    code1 = main(argv + ["--out", str(out1)])
    code2 = main(argv + ["--out", str(out2)])
    assert code1 == code2 == 0
    b1, b2 = out1.read_bytes(), out2.read_bytes()
    assert b1 == b2  # deterministic under the fixed seed
    golden = os.path.join(GOLDEN_DIR, name)
    assert b1 == open(golden, "rb").read(), f"report drifted from golden {name}"


def test_all_reports_parse_as_json():
    for name in GOLDEN_COMMANDS:
        data = json.load(open(os.path.join(GOLDEN_DIR, name)))
        assert data["tool"] == "convalg"
        assert data["status"] in ("pass", "ok")


def test_parse_error_exit_code(tmp_path, capsys):
    code = main(["lpa", "--graph", fixture_path("bad_edge.graph"), "verify-relations"])
    assert code == 2
    err = capsys.readouterr().err
    assert "bad_edge.graph:2" in err  # diagnostic carries the line number


def test_bad_groupoid_table_exit_code(capsys):
    code = main(["gpd", "--groupoid", fixture_path("bad_table.gpd"), "decompose"])
    assert code == 2
    assert "bad_table.gpd" in capsys.readouterr().err


def test_malformed_element_exit_code(capsys):
    code = main(["lpa", "--graph", fixture_path("oneloop.graph"), "mul", "v[e]", "v[zz]"])
    assert code == 2


def test_hecke_ring_precondition_exit_code(capsys):
    code = main(["hecke", "--p", "2", "--ring", "Z", "compose", "k=0->0 [1]", "k=0->0 [1]"])
    assert code == 3
    assert "does not invert" in capsys.readouterr().err
    code = main(["hecke", "--p", "2", "--ring", "Z[1/3]", "compose", "k=0->0 [1]", "k=0->0 [1]"])
    assert code == 3


def test_check_failure_exit_code():
    # a failing check yields status fail and exit code 1
    from convalg.cli import _status_code, make_report

    rep = make_report(["x"], {}, {}, {}, [{"name": "c", "pass": False}])
    assert rep["status"] == "fail"
    assert _status_code(rep) == 1


def test_norm_mixed_component_precondition(capsys):
    code = main(
        ["norm", "--graph", fixture_path("twocycle.graph"), "v[a] + p[x]"]
    )
    assert code == 3


def test_wrong_arity_is_parse_error(capsys):
    assert main(["lpa", "--graph", fixture_path("oneloop.graph"), "mul", "v[e]"]) == 2


def test_stdout_emission(capsys):
    code = main(["gpd", "--groupoid", fixture_path("z2.gpd"), "decompose"])
    assert code == 0
    out = capsys.readouterr().out
    data = json.loads(out)
    assert data["results"]["orbits"][0]["isotropy_order"] == 2


def test_norm_of_projection(tmp_path):
    # a vertex projection: I-norm 1, reduced about 1, bound exactly 1
    out = tmp_path / "norm.json"
    code = main(
        ["norm", "--graph", fixture_path("twoloop.graph"), "p[x]", "--out", str(out)]
    )
    assert code == 0
    res = json.loads(out.read_text())["results"]
    assert res["i_norm"] == "1" and res["max_norm_bound"] == "1"
    assert abs(float(res["reduced_norm"]) - 1.0) <= 1e-9


def test_ring_flag_parsing(tmp_path):
    out = tmp_path / "r.json"
    code = main(
        ["lpa", "--graph", fixture_path("oneloop.graph"), "--ring", "Q(i)", "star", "i * v[e]", "--out", str(out)]
    )
    assert code == 0
    data = json.loads(out.read_text())
    assert data["results"]["star"] == "-i * w[e]"
    assert main(["lpa", "--graph", fixture_path("oneloop.graph"), "--ring", "F7", "verify-relations"]) == 2
