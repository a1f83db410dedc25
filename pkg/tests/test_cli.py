import io
import json
from fractions import Fraction

import pytest

from totpos.cli import run
from totpos.io import read_matrix, write_matrix
from totpos.numkernel import Matrix
from totpos.witnesses import matrix_C


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), out)
    return code, json.loads(out.getvalue()) if out.getvalue() else None


@pytest.fixture
def c_file(tmp_path):
    path = tmp_path / "C.json"
    write_matrix(matrix_C(), path)
    return str(path)


def test_check(c_file, tmp_path):
    code, rep = call("check", "--property", "tn", "--file", c_file)
    assert code == 0 and rep["verdict"] == "holds"
    code, rep = call("check", "--property", "tn", "--file", c_file, "--strict-boundary")
    assert code == 3
    bad = tmp_path / "bad.json"
    write_matrix(Matrix([[1, 2], [3, 4]]), bad)
    code, rep = call("check", "--property", "tp", "--file", str(bad), "--deterministic")
    assert code == 1 and rep["certificate"]["witness"]["value"] == "-2"
    code, _ = call("check", "--property", "tp_r", "--order", "1", "--file", str(bad))
    assert code == 0
    code, _ = call("check", "--property", "tn", "--file", str(tmp_path / "missing.json"))
    assert code == 2


def test_falsify_and_classify():
    code, rep = call("falsify", "--fn", "exp(x)-1", "--mode", "tn", "--delta", "2")
    assert code == 1 and rep["family"] == "A"
    code, rep = call("falsify", "--power", "3,1", "--mode", "tn", "--delta", "3", "--budget", "50")
    assert code == 0 and rep["verdict"] == "no counterexample"
    code, rep = call("classify", "--mode", "tn", "--delta", "4")
    assert code == 0 and rep["report"] == "constants c >= 0 or F(x) = cx, c > 0"
    assert call("is-preserver", "--mode", "tn", "--delta", "3", "--power", "1,2")[0] == 0
    assert call("is-preserver", "--mode", "tn", "--delta", "3", "--power", "1,1/2")[0] == 1


def test_parse_and_usage_errors(capsys):
    assert call("falsify", "--fn", "x^^2", "--mode", "tn", "--delta", "2")[0] == 2
    assert "at offset 2" in capsys.readouterr().err
    assert call("apply", "--power", "1,2", "--file", "missing.json")[0] == 2
    assert call("nosuch")[0] == 2
    assert call("witness", "--family", "A", "--params", "x=1")[0] == 2
    assert call("classify", "--mode", "bogus")[0] == 2


def test_apply_and_witness(tmp_path):
    src = tmp_path / "m.json"
    out = tmp_path / "out.json"
    write_matrix(Matrix([[0, 1], [2, 3]]), src)
    code, rep = call("apply", "--power", "1,0", "--file", str(src), "--output", str(out))
    assert code == 0 and read_matrix(out) == Matrix([[0, 1], [1, 1]])
    code, rep = call("witness", "--family", "A", "--params", "x=2,y=3")
    assert code == 0 and rep["matrix"]["data"] == ["2", "6", "1", "3"]
    code, rep = call("witness", "--family", "M_tp", "--params", "x=1,y=4,eps=1")
    assert rep["matrix"]["data"] == ["2", "3", "3", "5"]


def test_completion_commands(tmp_path):
    code, rep = call("embed", "--entries", "4,2,3,5", "--m", "3", "--n", "3")
    assert code == 0 and rep["verdict"] == "holds"
    code, rep = call("embed-at", "--entries", "4,2,3,5", "--m", "4", "--n", "4",
                     "--rows", "1,3", "--cols", "0,2")
    assert code == 0
    assert call("embed", "--entries", "1,1,1,1", "--m", "3", "--n", "3")[0] == 2
    code, rep = call("complete-hankel", "--abc", "1,1/2,1/2", "--delta", "3")
    assert code == 0 and [float(v) for v in rep["matrix"]["data"][:3]] == [1, 0.5, 0.5]
    code, rep = call("complete-hankel", "--abc", "2,1,3", "--n", "3", "--k", "1", "--N", "4")
    assert code == 0
    moments = ",".join(str(Fraction(1, j + 1)) for j in range(5))
    assert call("extend-backwards", "--moments", moments)[0] == 0
    assert call("extend-backwards", "--moments", moments, "--margin", "0")[0] == 1
    src = tmp_path / "n.json"
    write_matrix(Matrix([[1, 0], [0, 1]]), src)
    code, rep = call("densify", "--file", str(src))
    assert code == 0


def test_densify_unsupported(c_file):
    assert call("densify", "--file", c_file)[0] == 2


def test_exit_code_deterministic(c_file):
    runs = {json.dumps(call("check", "--property", "tn", "--file", c_file, "--deterministic")[1])
            for _ in range(3)}
    assert len(runs) == 1
