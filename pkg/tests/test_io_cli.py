import json
import math
import struct

import numpy as np
import pytest

from sparselaw import io
from sparselaw.cli import main


def test_config_file(tmp_path):
    p = tmp_path / "ens.cfg"
    p.write_text("n = 500\nq = 4.5  # sparsity\nf_override = none\ninclude_diagonal = false\nseed = 9\n")
    assert io.read_config(p) == {"n": 500, "q": 4.5, "f_override": None,
                                 "include_diagonal": False, "seed": 9}
    p.write_text("n = 5\nbogus = 1\n")
    with pytest.raises(ValueError, match="bogus"):
        io.read_config(p)


def test_matrix_binary_layout(tmp_path):
    A = np.arange(9.0).reshape(3, 3)
    path = tmp_path / "a.bin"
    io.write_matrix(path, A)
    raw = path.read_bytes()
    assert struct.unpack("<Q", raw[:8]) == (3,)
    assert struct.unpack("<9d", raw[8:]) == tuple(A.ravel())
    assert np.array_equal(io.read_matrix(path), A)


def test_complex_binary_layout(tmp_path):
    G = np.array([[1 + 2j, 3 - 1j], [0.5j, -2.0]])
    path = tmp_path / "g.bin"
    io.write_complex_matrix(path, G)
    raw = path.read_bytes()
    assert struct.unpack("<Q", raw[:8]) == (2,)
    assert struct.unpack("<8d", raw[8:]) == (1, 2, 3, -1, 0, 0.5, -2, 0)
    assert np.array_equal(io.read_complex_matrix(path), G)
    assert np.array_equal(io.read_coefficient_file(path, vector=False), G)


def test_edge_list_round_trip(tmp_path):
    e = np.array([[0, 3], [1, 1], [2, 5]])
    path = tmp_path / "g.edges"
    io.write_edge_list(path, e)
    assert path.read_text() == "0 3\n1 1\n2 5\n"
    assert np.array_equal(io.read_edge_list(path), e)


def test_json_and_csv(tmp_path):
    text = io.dumps_json({"b": 1.5, "a": [np.int64(2), math.inf], "c": 1 + 2j})
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text)["a"][1] == "inf"
    path = tmp_path / "x.csv"
    io.write_csv(path, ["name", "value"], [["a,b", 0.1], {"name": 'q"t', "value": 2}])
    assert path.read_bytes() == b'name,value\r\n"a,b",0.1\r\n"q""t",2\r\n'


def test_ldp_instance_file(tmp_path):
    path = tmp_path / "inst.txt"
    path.write_text("kind = quadratic\nr = 4\np = 0.5\ncoeffs = 0,1,1;1,0,1;1,1,0\n")
    spec = io.read_ldp_instance(path)
    assert spec["coefficients"].shape == (3, 3) and spec["r"] == 4
    io.write_matrix(tmp_path / "a.bin", np.ones((2, 2)))
    path.write_text("kind = bilinear\nr = 2\np = 0.5\ncoeffs_file = a.bin\n")
    assert io.read_ldp_instance(path)["coefficients"].shape == (2, 2)


def test_cli_sample(tmp_path, capsys):
    out = tmp_path / "g.edges"
    assert main(["sample", "--n", "1000", "--q", "5", "--seed", "7", "--out", str(out)]) == 0
    first = out.read_bytes()
    assert main(["sample", "--n", "1000", "--q", "5", "--seed", "7", "--out", str(out)]) == 0
    assert out.read_bytes() == first
    edges = len(first.splitlines())
    # 12487.5 expected pairs incl. diagonal; 6 standard deviations
    assert abs(edges - 12487.5) < 6 * math.sqrt(12487.5)
    manifest = json.loads((tmp_path / "g.edges.manifest.json").read_text())
    assert manifest["seed"] == 7
    assert "isolated" in capsys.readouterr().out


def test_cli_sample_matrix(tmp_path):
    out = tmp_path / "m"
    assert main(["sample", "--n", "20", "--q", "2", "--seed", "1", "--out", str(out)]) == 0
    A = io.read_matrix(f"{out}.bin")
    assert np.array_equal(A, A.T)


def test_cli_errors(capsys):
    assert main(["sample", "--n", "100", "--q", "40"]) != 0
    err = capsys.readouterr().err
    assert "sqrt(N)" in err and err.count("\n") == 1
    assert main(["ldp", "--kind", "linear", "--n", "2", "--p", "0.5", "--r", "5",
                 "--coeffs", "1,1"]) != 0
    assert "Let r be even" in capsys.readouterr().err
    assert main(["nonsense"]) != 0
    assert capsys.readouterr().err.count("\n") == 1


def test_cli_ldp_enumerate(capsys):
    assert main(["ldp", "--kind", "linear", "--n", "2", "--p", "0.5", "--r", "4",
                 "--coeffs", "1,1", "--mode", "enumerate"]) == 0
    out = capsys.readouterr().out
    assert "bound=8" in out and "estimate=1.189207115" in out and "PASS" in out


def test_cli_ldp_bound_only(tmp_path, capsys):
    out = tmp_path / "l"
    assert main(["ldp", "--kind", "bilinear", "--p", "0.5", "--r", "2",
                 "--coeffs", "1,0;0,1", "--out", str(out)]) == 0
    payload = json.loads((tmp_path / "l.json").read_text())
    assert payload["result"]["estimate"] == ""
    assert "estimate" not in capsys.readouterr().out


def test_cli_constants(capsys):
    assert main(["constants", "--delta", "1", "--D", "1"]) == 0
    out = capsys.readouterr().out
    assert "2.604" in out and "9.91" in out
    assert main(["constants", "--delta", "1", "--D", "1", "--q", "5", "--f", "1", "--n", "1000",
                 "--tau", "0.5"]) == 0
    assert "N_0" in capsys.readouterr().out


def test_cli_localaw_shape_and_threads(tmp_path):
    args = ["localaw", "--n", "200", "--q-mult", "2", "--trials", "2",
            "--etas", "geometric:1:0.02:40", "--seed", "3"]
    assert main(args + ["--out", str(tmp_path / "a"), "--threads", "1"]) == 0
    assert main(args + ["--out", str(tmp_path / "b"), "--threads", "2"]) == 0
    a = (tmp_path / "a.json").read_bytes()
    assert a == (tmp_path / "b.json").read_bytes()
    assert len(json.loads(a)["rows"]) == 40
    assert (tmp_path / "a.long.csv").exists()


def test_cli_entropy_seed_recorded(tmp_path):
    out = tmp_path / "d"
    assert main(["dos", "--n", "120", "--q", "3", "--trials", "1", "--out", str(out)]) == 0
    m = json.loads((tmp_path / "d.manifest.json").read_text())
    assert m["seed_source"] == "entropy"
    rerun = tmp_path / "e"
    assert main(["dos", "--n", "120", "--q", "3", "--trials", "1", "--seed", str(m["seed"]),
                 "--out", str(rerun)]) == 0
    assert (tmp_path / "d.json").read_bytes() == (tmp_path / "e.json").read_bytes()


def test_cli_other_commands(tmp_path):
    base = ["--trials", "1", "--seed", "1"]
    assert main(["deloc", "--n", "150", "--q-mult", "3"] + base) == 0
    assert main(["que", "--n", "150", "--q-mult", "3"] + base) == 0
    assert main(["subcritical", "--n", "500", "--kappa", "0.5"] + base) == 0
    assert main(["mainest", "--n", "150", "--q", "4"] + base) == 0
    assert main(["bootstrap", "--n", "150", "--q", "4", "--xi", "1",
                 "--etas", "1,0.1"] + base) == 0


def test_cli_negative_list_values(tmp_path):
    out = tmp_path / "d"
    assert main(["dos", "--n", "120", "--q", "3", "--trials", "1", "--seed", "1",
                 "--intervals", "-1:1,0:2,-2:2", "--out", str(out)]) == 0
    rows = json.loads((tmp_path / "d.json").read_text())["rows"]
    assert [r["a"] for r in rows] == [-1.0, 0.0, -2.0]
    assert main(["ldp", "--kind", "linear", "--n", "2", "--p", "0.5", "--r", "2",
                 "--coeffs", "-1,2"]) == 0
