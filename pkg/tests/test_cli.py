import json
import subprocess
import sys

import numpy as np
import pytest

from matdyadic import files
from matdyadic.checks import fixture_dir
from matdyadic.cli import main

FIX = fixture_dir()


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def report(out):
    return dict(line.split("=", 1) for line in out.strip().splitlines())


def test_a2_const_id(capsys):
    code, out, _ = run(capsys, "a2", "--weight", FIX / "const_id.json")
    assert code == 0 and out == "a2=1.0\n"


def test_square_bounds(capsys):
    code, out, _ = run(capsys, "square-bounds", "--weight", FIX / "step9.json")
    r = report(out)
    assert code == 0
    assert float(r["c_low"]) == pytest.approx(1.73030, abs=1e-4)
    assert float(r["c_up"]) == pytest.approx(3.70782, abs=1e-4)
    _, out, _ = run(capsys, "square-bounds", "--weight", FIX / "two_leaf.json", "--include-mean")
    assert float(report(out)["c_up"]) > 1


@pytest.mark.parametrize("argv, keys", [
    (["shift-norm", "--weight", FIX / "martingale.json", "--method", "power"], {"shift_norm"}),
    (["multiplier-norm", "--weight", FIX / "martingale.json", "--sigma", FIX / "symbol.json"],
     {"tsigma_norm", "sigma_inf", "necessity_lower"}),
    (["embedding", "--weight", FIX / "martingale.json", "--function", FIX / "function.json"],
     {"lhs", "ratio"}),
    (["s123", "--weight", FIX / "martingale.json", "--function", FIX / "function.json"],
     {"s1", "s2_bound", "s3", "s3_averaged", "total"}),
    (["testing", "--weight", FIX / "two_leaf.json"], {"testing_sup", "testing_ratio"}),
    (["carleson", "--weight", FIX / "martingale.json", "--sequence", FIX / "carleson.json"],
     {"c_embed", "c_test", "ratio"}),
    (["maximal", "--weight", FIX / "martingale.json", "--function", FIX / "function.json"],
     {"sup", "values"}),
])
def test_subcommands(capsys, argv, keys):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert keys <= set(report(out))


def test_testing_value(capsys):
    _, out, _ = run(capsys, "testing", "--weight", FIX / "two_leaf.json")
    assert float(report(out)["testing_ratio"]) == pytest.approx(0.14745, abs=1e-4)


def test_truncate(capsys, tmp_path):
    out_file = tmp_path / "wn.json"
    code, out, _ = run(capsys, "truncate", "--weight", FIX / "rotation.json", "--n", 2,
                       "--out", out_file)
    assert code == 0
    wn = files.load(out_file)
    lam = np.linalg.eigvalsh(wn.values)
    assert lam.min() >= 0.5 - 1e-12 and lam.max() <= 2 + 1e-12
    assert float(report(out)["a2_truncated"]) <= float(report(out)["a2"])


def test_sweep_is_byte_identical(capsys, tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        code, out, _ = run(capsys, "sweep", "--family", "random_martingale", "--range",
                           "0.2:1.0:4", "--depth", 3, "--dim", 2, "--seed", 5,
                           "--measure", "c_up,c_low,testing_ratio", "--out", p)
        assert code == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    r = report(out)
    assert r["rows"] == "4" and "slope_c_up" in r


def test_sweep_single_point_refused(capsys, tmp_path):
    code, out, _ = run(capsys, "sweep", "--family", "two_value", "--range", "1:1:1",
                       "--measure", "c_up", "--out", tmp_path / "s.csv")
    assert code == 0 and report(out)["fit_c_up"].startswith("refused")


def test_invalid_input_exit_1(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "weight", "dim": 1, "depth": 2, "leaves": [[[1.0]]]}))
    code, out, err = run(capsys, "a2", "--weight", bad)
    assert code == 1 and out == "" and "leaves" in err
    code, _, err = run(capsys, "a2", "--weight", tmp_path / "missing.json")
    assert code == 1 and "cannot read" in err
    code, _, err = run(capsys, "multiplier-norm", "--weight", FIX / "two_leaf.json",
                       "--sigma", FIX / "symbol.json")
    assert code == 1
    code, _, err = run(capsys, "sweep", "--family", "two_value", "--range", "1:2:3",
                       "--measure", "bogus", "--out", tmp_path / "x.csv")
    assert code == 1 and "--measure" in err
    code, _, err = run(capsys, "truncate", "--weight", FIX / "two_leaf.json", "--n", 0.5,
                       "--out", tmp_path / "t.json")
    assert code == 1


def test_numerical_failure_exit_2(capsys, tmp_path):
    bad = tmp_path / "np.json"
    bad.write_text(json.dumps({"kind": "weight", "dim": 1, "depth": 1,
                               "leaves": [[[1.0]], [[-2.0]]]}))
    code, _, err = run(capsys, "a2", "--weight", bad)
    assert code == 2 and "positive definite" in err


def test_verify_small(capsys):
    code, out, _ = run(capsys, "verify", "--depth", 3, "--dim", 2, "--seed", 1, "--trials", 5)
    r = report(out)
    assert code == 0 and r["failed"] == "0" and r["passed"] == r["checks"]


def test_verify_fails_on_broken_fixture(capsys, tmp_path, monkeypatch):
    import matdyadic.checks as checks

    monkeypatch.setitem(checks.FIXTURE_VALUES, "two_leaf.json", {"a2": 2.0})
    code, _, err = run(capsys, "verify", "--depth", 2, "--trials", 1)
    assert code == 1 and "fixtures.two_leaf_a2" in err


def test_entry_point():
    proc = subprocess.run([sys.executable, "-m", "matdyadic", "a2", "--weight",
                           str(FIX / "two_leaf.json")], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "a2=1.5625000000000007\n"
