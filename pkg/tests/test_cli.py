import json
import subprocess
import sys

import pytest

from loopnet.cli import main, run
from loopnet.loopgrp import format_word, multiply
from loopnet.net import FibreCache
from loopnet import fixtures


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


@pytest.fixture
def towers_file(tmp_path):
    return write(tmp_path, "towers.json", {"kind": "fixture", "name": "twotowers"})


def test_validate_explicit(tmp_path):
    doc = {"kind": "explicit", "elements": ["x", "y", "o"], "leq": [["x", "o"], ["y", "o"]],
            "perp": [["x", "y"]]}
    code, rep = run(["validate", write(tmp_path, "p.json", doc)])
    assert code == 0 and rep["status"] == "pass"
    assert rep["schema"] == "loopnet-report/1"
    assert len(rep["inputs"]["poset"]["sha256"]) == 64


def test_validate_reports_broken_poset(tmp_path):
    doc = {"kind": "explicit", "elements": ["a", "b"], "leq": [["a", "b"], ["b", "a"]]}
    code, rep = run(["validate", write(tmp_path, "p.json", doc)])
    assert code == 1


@pytest.mark.parametrize("doc, needle", [
    ({"kind": "explicit", "elements": ["a"], "leq": [["a", "zz"]]}, "zz"),
    ({"kind": "nonsense"}, "nonsense"),
    ({"kind": "fixture", "name": "nope"}, "nope"),
    ({"kind": "circle", "n": 6}, "lengths"),
])
def test_bad_specs_are_error_objects(tmp_path, doc, needle):
    code, rep = run(["validate", write(tmp_path, "p.json", doc)])
    assert code == 1 and rep["status"] == "error"
    assert needle in rep["error"]["message"]


def test_unreadable_inputs(tmp_path):
    code, rep = run(["validate", str(tmp_path / "missing.json")])
    assert code == 1 and rep["error"]["type"] == "InputError"
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    code, rep = run(["validate", str(bad)])
    assert code == 1 and "invalid JSON" in rep["error"]["message"]


def test_simplex_counts(towers_file):
    code, rep = run(["simplices", towers_file])
    assert code == 0
    assert rep["results"]["counts"]["sigma1"] == 211


def test_word_ops(towers_file):
    code, rep = run(["word", "reduce", "(o1a;x1,y1)(o1a;y1,x1)(O1;o1a,o1b)"])
    assert code == 0 and rep["results"]["word"] == "(O1;o1a,o1b)"
    code, rep = run(["word", "reduce", "~(O1;o1a,o1a)(O1;o1a,o1a)"])
    assert rep["results"]["word"] == "1"
    code, rep = run(["word", "is-loop", "(o1a;x1,y1)(o1a;y1,x1)"])
    assert rep["results"]["loop"] is True


def test_word_equal_exit_codes(towers_file):
    fib = FibreCache(fixtures.two_towers())
    p, q = fib["O1"].generators[3], fib["O2"].generators[7]
    code, rep = run(["word", "equal", format_word(multiply(p, q)), format_word(multiply(q, p)),
                     "--poset", towers_file])
    assert code == 0 and rep["results"]["verdict"] == "Equal"
    assert rep["results"]["certificate"]["steps"]
    p2 = fib["O1"].generators[5]
    code, rep = run(["word", "equal", format_word(multiply(p, p2)), format_word(multiply(p2, p)),
                     "--poset", towers_file, "--depth", "2", "--width", "500"])
    assert code == 2 and rep["status"] == "unknown"


def test_documented_reduce_example():
    code, rep = run(["word", "reduce", "(o;x,y) ~(o;x,y)"])
    assert code == 0 and rep["results"] == {"word": "1", "length": 0}
    assert rep["config"]["defaults"]["quotientMaxLength"] == 40


def test_certify_nontrivial_default_simplex(tmp_path):
    mink = write(tmp_path, "mink.json", {"kind": "fixture", "name": "minkowski"})
    field = write(tmp_path, "field.json", {"mass": 1.0})
    code, rep = run(["certify", "nontrivial", mink, field])
    assert code == 0
    res = rep["results"]
    assert res["certificate"]["direct"] > 0 and res["certificate"]["relErr"] < 1e-4
    assert res["controlVanishes"]
    assert any(v != "0" for v in res["certificate"]["translation"][1:])
    assert rep["config"]["fieldConfig"]["mass"] == 1.0


def test_bad_word_is_error(towers_file):
    code, rep = run(["word", "is-path", "(o1a;x1", "--poset", towers_file])
    assert code == 1 and "bad word" in rep["error"]["message"]


def test_pathframe_obstructed(tmp_path):
    f = write(tmp_path, "swap.json", {"kind": "fixture", "name": "diamond-swap"})
    code, rep = run(["pathframe", f])
    assert code == 1 and rep["results"]["status"] == "obstructed"
    assert rep["results"]["witness"]["target"] in ("x", "y")


def test_pathframe_unknown_pole(towers_file):
    code, rep = run(["pathframe", towers_file, "--pole", "nowhere"])
    assert code == 1 and "nowhere" in rep["error"]["message"]


def test_connection_and_gauge(towers_file):
    code, rep = run(["connection-check", towers_file, "--components", "O1,O2"])
    assert code == 0 and rep["results"]["system"]["causalChecks"] > 0
    code, rep = run(["gauge-apply", towers_file, "--pole", "x1", "--components", "O1,O2"])
    assert code == 0 and rep["results"]["framesDiffer"] > 0


def test_holonomy_is_unitary(towers_file):
    import numpy as np

    code, rep = run(["holonomy", towers_file, "(o1a;x1,y1)(O1;o1b,o1a)", "--components", "O1,O2"])
    assert code == 0
    U = np.array(rep["results"]["value"]["re"]) + 1j * np.array(rep["results"]["value"]["im"])
    assert np.allclose(U @ U.conj().T, np.eye(4), atol=1e-10)


def test_reports_are_byte_identical(tmp_path, towers_file):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["--out", str(a), "net", towers_file, "--replay", "20"]) == 0
    assert main(["--out", str(b), "net", towers_file, "--replay", "20"]) == 0
    assert a.read_bytes() == b.read_bytes()
    rep = json.loads(a.read_text())
    assert rep["config"]["replay"] == 20 and "threads" in rep["config"]


def test_em_transform_csv(tmp_path):
    mink = write(tmp_path, "m.json", {"kind": "fixture", "name": "minkowski"})
    csv = tmp_path / "e.csv"
    code, rep = run(["em-transform", mink, "--element", "C", "--momenta", "0,0,0;1,2,0",
                     "--csv", str(csv)])
    assert code == 0
    lines = csv.read_text().strip().splitlines()
    assert len(lines) == 3


def test_module_entry_point(towers_file):
    out = subprocess.run([sys.executable, "-m", "loopnet", "validate", towers_file],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["status"] == "pass"
