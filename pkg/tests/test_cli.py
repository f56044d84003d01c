import json
import math

import numpy as np
import pytest

from hardylorentz import (AtomicDecomposition, Signal, decompose, lorentz_quasinorm,
                          lorentz_quasinorm_levels, load_signal, make_signal, rearrangement,
                          reconstruct)
from hardylorentz.cli import main


def write_signal(path, f):
    path.write_text(json.dumps(f.to_json()))
    return str(path)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_norm_indicator(tmp_path, capsys):
    path = write_signal(tmp_path / "one.json", Signal(0.0, 0.125, np.ones(8)))
    for p in ("1/2", "2/3", "1"):
        for q in ("1/2", "2", "inf"):
            code, out, _ = run(capsys, "norm", path, "--p", p, "--q", q)
            data = json.loads(out)
            assert code == 0 and abs(data["closed"] - 1) <= 1e-12
            assert data["levels"] == lorentz_quasinorm_levels(Signal(0.0, 0.125, np.ones(8)), (p, q))


def test_norm_zero_and_form(tmp_path, capsys):
    path = write_signal(tmp_path / "z.json", Signal(0.0, 0.25, np.zeros(4)))
    code, out, _ = run(capsys, "norm", path, "--p", "1", "--q", "2", "--form", "closed")
    assert code == 0 and json.loads(out) == {"p": 1.0, "q": 2.0, "closed": 0.0}


def test_norm_equals_library_exactly(tmp_path, capsys):
    f = make_signal(3, 1, 512, "lognormal")
    path = write_signal(tmp_path / "f.json", f)
    code, out, _ = run(capsys, "norm", path, "--p", "2/3", "--q", "inf")
    data = json.loads(out)
    assert data["closed"] == lorentz_quasinorm(f, (2 / 3, math.inf))
    assert data["levels"] == lorentz_quasinorm_levels(f, (2 / 3, math.inf))


def test_usage_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "norm", bad, "--p", "1", "--q", "2")[0] == 2
    assert run(capsys, "norm", tmp_path / "missing.json", "--p", "1", "--q", "2")[0] == 2
    assert run(capsys, "norm", bad, "--p", "x", "--q", "2")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "gen-corpus", "--count", "2")[0] == 2
    cfg = tmp_path / "run.cfg"
    cfg.write_text("colour = red\n")
    assert run(capsys, "verify", "thm23", "--config", cfg)[0] == 2
    ones = write_signal(tmp_path / "ones.json", Signal(0.0, 0.125, np.ones(8)))
    assert run(capsys, "decompose", ones, "--p", "1")[0] == 2


def test_rearrange(tmp_path, capsys):
    path = write_signal(tmp_path / "f.json", Signal(0.0, 0.25, np.array([1.0, -3.0, 0.0, 2.0])))
    code, out, _ = run(capsys, "rearrange", path)
    assert code == 0
    data = json.loads(out)
    assert code == 0 and data == rearrangement(load_signal(path)).to_json()


def test_decompose_zero_and_roundtrip(tmp_path, capsys):
    zero = write_signal(tmp_path / "z.json", Signal(0.0, 1 / 16, np.zeros(16)))
    code, out, _ = run(capsys, "decompose", zero, "--p", "1")
    assert code == 0 and not json.loads(out)["levels"]
    f = make_signal(2, 0, 256, "uniform", moments_for=0.5)
    src = write_signal(tmp_path / "f.json", f)
    dest = tmp_path / "dec.json"
    code, out, _ = run(capsys, "decompose", src, "--p", "1/2", "--out", dest)
    assert code == 0 and json.loads(out)["reconstruction_error"] <= 1e-6
    back = AtomicDecomposition.from_json(json.loads(dest.read_text()))
    assert np.array_equal(reconstruct(back).values, reconstruct(decompose(f, 0.5)).values)


def test_kfunc(tmp_path, capsys):
    path = write_signal(tmp_path / "one.json", Signal(0.0, 0.125, np.ones(8)))
    code, out, _ = run(capsys, "kfunc", path, "--T", "4")
    data = json.loads(out)
    assert code == 0 and np.allclose(data["K"], np.minimum(data["t"], 1.0))
    code, out, _ = run(capsys, "kfunc", path, "--T", "2", "--method", "holmstedt")
    assert json.loads(out)["K"][0] == pytest.approx(0.5)


def test_verify_empty_corpus(capsys):
    code, out, err = run(capsys, "verify", "thm21", "--count", "0")
    assert code == 0 and "thm21 no_errors: pass" in err


def test_verify_is_byte_identical(tmp_path, capsys):
    outs = []
    for name in ("a", "b"):
        code, _, _ = run(capsys, "verify", "thm23", "--count", "3", "--seed", "4", "--length", "128",
                         "--out", tmp_path / name)
        assert code == 0
        outs.append((tmp_path / f"{name}.csv").read_bytes())
    assert outs[0] == outs[1] and outs[0].count(b"\n") == 1 + 3 * 3
    report = json.loads((tmp_path / "a.json").read_text())
    assert report["config"]["seed"] == 4 and report["command"]


def test_verify_failure_exit_code(capsys):
    code, _, err = run(capsys, "verify", "lorentz-equiv", "--count", "2", "--length", "64")
    assert code == 1 and "FAIL" in err


def test_gen_corpus(tmp_path, capsys):
    code, _, _ = run(capsys, "gen-corpus", "--count", "2", "--length", "64", "--seed", "1",
                     "--out", tmp_path / "c")
    assert code == 0
    f = Signal.from_json(json.loads((tmp_path / "c" / "signal_00001.json").read_text()))
    assert np.array_equal(f.values, make_signal(1, 1, 64).values)
