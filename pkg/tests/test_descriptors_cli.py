import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from rispace import cli
from rispace.descriptors import (
    parse_concave,
    parse_convex,
    parse_exponent,
    parse_function,
    parse_functions,
    parse_sequence,
    split,
)
from rispace.errors import DescriptorError, OverlapError
from rispace.generators import ExpConvex, PowLogConcave, PowLogConvex


def test_split():
    assert split("powlog:0.5,1") == ("powlog", [0.5, 1.0])
    assert split(" POW :2") == ("pow", [2.0])
    for bad in ["pow", "nope:1", "pow:x", "pow:1,2", "indicator:0", "pow:nan", "pow:inf", 3]:
        with pytest.raises(DescriptorError):
            split(bad)


def test_generators_from_text():
    assert parse_concave("pow:0.5").to_dict() == PowLogConcave(0.5).to_dict()
    assert parse_concave("powlog:0.5,1").to_dict() == PowLogConcave(0.5, 1.0).to_dict()
    assert parse_convex("exp:2").to_dict() == ExpConvex(2.0).to_dict()
    assert parse_convex("powlog:2,1").to_dict() == PowLogConvex(2.0, 1.0).to_dict()
    with pytest.raises(DescriptorError):
        parse_concave("exp:1")
    with pytest.raises(DescriptorError):
        parse_convex("const:2")


def test_generators_from_json():
    g = PowLogConvex(2.0, 1.0)
    assert parse_convex(json.dumps(g.to_dict())).to_dict() == g.to_dict()
    with pytest.raises(DescriptorError):
        parse_concave(json.dumps(g.to_dict()))
    with pytest.raises(DescriptorError):
        parse_convex("{not json")


def test_exponents():
    t = np.array([0.1, 0.6])
    np.testing.assert_allclose(parse_exponent("const:2").value(t), [2, 2])
    np.testing.assert_allclose(parse_exponent("step:2,0.5,3").value(t), [2, 3])
    np.testing.assert_allclose(parse_exponent("affine:2,3").value(t), [2.1, 2.6])
    with pytest.raises(DescriptorError):
        parse_exponent("pow:1")


def test_functions():
    f = parse_function("indicator:0,0.25,3")
    np.testing.assert_allclose(f.evaluate(np.array([0.1, 0.5])), [3, 0])
    g = parse_function("powersing:2,0.5,-0.5,0.5,1")
    assert g.evaluate(np.array([0.75]))[0] == pytest.approx(2 * 0.25**-0.5)
    h = parse_functions(["indicator:0,0.5", "indicator:0.5,1,2"])
    np.testing.assert_allclose(h.evaluate(np.array([0.25, 0.75])), [1, 2])
    assert parse_function(json.dumps(h.to_dict())) == h
    with pytest.raises(OverlapError):
        parse_functions(["indicator:0,0.6", "indicator:0.5,1"])
    for bad in ["indicator:0.5,0.2", "indicator:0,2", "exp:1"]:
        with pytest.raises(DescriptorError):
            parse_function(bad)
    assert parse_sequence(["seq:1,0.5", "seq:0.25"]) == [1.0, 0.5, 0.25]


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_witness_theorem4(capsys):
    code, out, _ = run(["witness", "--theorem", "4", "--psi", "pow:0.5", "--phi", "pow:1"], capsys)
    assert code == 0
    assert json.loads(out)["report"]["verdict"] == "AllVerified"


def test_cli_norm_orlicz(capsys):
    code, out, _ = run(["norm", "--space", "orlicz", "--psi", "pow:2", "--fn", "indicator:0,0.25"], capsys)
    assert code == 0
    res = json.loads(out)["result"]
    assert res["value"] == pytest.approx(0.5, rel=1e-10)
    assert res["status"] == "Converged"


def test_cli_norm_diverged_exit(capsys):
    code, out, _ = run(["norm", "--space", "orlicz", "--psi", "pow:2", "--fn", "pow:-0.5"], capsys)
    assert code == 1
    assert json.loads(out)["result"]["status"] == "Diverged"


def test_cli_malformed_descriptor(capsys):
    code, out, err = run(["norm", "--space", "orlicz", "--psi", "pow:two", "--fn", "indicator:0,1"], capsys)
    assert code == 1 and out == ""
    assert "input error" in err and "pow:two" in err


def test_cli_validation_precedes_computation(capsys, monkeypatch):
    called = []
    monkeypatch.setitem(cli.COMMANDS, "witness", lambda args: called.append(1))
    code, _, _ = run(["witness", "--theorem", "4", "--psi", "pow:0.5", "--phi", "bogus:1"], capsys)
    assert code == 1 and not called


def test_cli_precondition_failure(capsys):
    code, _, err = run(["witness", "--theorem", "4", "--psi", "pow:0.5", "--phi", "pow:0.5"], capsys)
    assert code == 1 and "precondition" in err


def test_cli_check_and_seq(capsys):
    code, out, _ = run(["check", "--relation", "delta2", "--psi", "exp:1"], capsys)
    assert code == 1 and json.loads(out)["result"]["verdict"] is False
    code, out, _ = run(["check", "--relation", "lorentz-inclusion", "--phi", "pow:0.5", "--psi", "pow:1"], capsys)
    assert code == 0
    code, out, _ = run(["norm", "--space", "seq-nakano", "--exponent", "const:2", "--fn", "seq:3,4"], capsys)
    assert code == 0
    assert json.loads(out)["result"]["status"] == "Converged"


def test_cli_output_is_byte_stable(tmp_path):
    outs = []
    for i in range(2):
        p = tmp_path / f"r{i}.json"
        assert cli.main(["witness", "--theorem", "7", "--psi", "pow:2", "--phi", "pow:3", "--out", str(p)]) == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]


def test_cli_csv(tmp_path, capsys):
    p = tmp_path / "x.csv"
    code = cli.main(["rearrange", "--fn", "indicator:0.5,1,2", "--fn", "indicator:0,0.25", "--csv", str(p),
                     "--points", "8"])
    capsys.readouterr()
    assert code == 0
    rows = list(csv.reader(p.open()))
    assert rows[0] == ["t", "value"] and len(rows) == 9
    vals = [float(r[1]) for r in rows[1:]]
    assert vals == [2.0] * 4 + [1.0] * 2 + [0.0] * 2


def test_cli_scenario_file(tmp_path, capsys):
    sc = tmp_path / "s.json"
    sc.write_text(json.dumps({"command": "norm", "space": "lorentz", "psi": "pow:0.5", "fn": ["indicator:0,0.25"]}))
    code, out, _ = run(["run", "--scenario", str(sc)], capsys)
    assert code == 0
    assert json.loads(out)["result"]["value"] == pytest.approx(0.5, rel=1e-10)


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "rispace", "norm", "--space", "marcinkiewicz", "--psi", "pow:1",
                        "--fn", "indicator:0,0.5,4"], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert json.loads(r.stdout)["result"]["value"] == pytest.approx(4.0)
