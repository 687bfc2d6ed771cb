import json
import os
import subprocess
import sys

import pytest

from motivic import cli
from motivic.errors import UsageError
from motivic.scalar import FqContext, LaurentSeries

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
H3 = os.path.join(ROOT, "data", "h3_q2.json")
F2, F3 = FqContext(2), FqContext(3)


def run_json(capsys, *argv):
    code = cli.main(list(argv) + ["--format", "json"])
    out = capsys.readouterr().out
    return code, json.loads(out)


def run_text(capsys, *argv):
    code = cli.main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


# -- argument parsing ----------------------------------------------------------


def test_parse_defaults(monkeypatch):
    monkeypatch.delenv(cli.PRECISION_ENV, raising=False)
    cmd = cli.parse_args(["zeta"])
    assert cmd.verb == "zeta" and cmd.sub is None
    assert cmd.params["q"] == 2 and cmd.params["n"] == 1
    assert cmd.params["precision"] == 40 and cmd.params["t_degree"] == 64


def test_parse_field_options():
    assert cli.parse_args(["zeta", "--q", "9"]).params["r"] == 2
    p = cli.parse_args(["zeta", "--p", "3", "--r", "2"]).params
    assert (p["q"], p["p"], p["r"]) == (9, 3, 2)


def test_parse_mzv_tuple():
    assert cli.parse_args(["mzv", "--s", "1,3"]).params["s"] == [1, 3]


def test_env_precision(monkeypatch):
    monkeypatch.setenv(cli.PRECISION_ENV, "17")
    assert cli.parse_args(["zeta"]).params["precision"] == 17
    assert cli.parse_args(["zeta", "--prec", "9"]).params["precision"] == 9
    monkeypatch.setenv(cli.PRECISION_ENV, "abc")
    with pytest.raises(UsageError):
        cli.parse_args(["zeta"])


@pytest.mark.parametrize("argv", [
    ["nonsense"],
    ["verify"],
    ["verify", "bogus"],
    ["zeta", "extra"],
    ["zeta", "--q", "6"],
    ["zeta", "--q", "4", "--p", "2"],
    ["zeta", "--r", "2"],
    ["zeta", "--p", "4"],
    ["zeta", "--n", "0"],
    ["zeta", "--prec", "0"],
    ["mzv"],
    ["mzv", "--s", "1,x"],
    ["mzv", "--s", "0,1"],
    ["exp"],
    ["exp-coeffs", "--module", "mzv", "--q", "3"],
    ["verify", "mellin", "--hn-file", "/nonexistent.json"],
])
def test_usage_errors(argv):
    with pytest.raises(UsageError):
        cli.parse_args(argv)


def test_parse_scalar_terms():
    x = cli.parse_scalar(F3, "2*u^3 + theta^2 - 1 + u^-1")
    want = {-2: 1, -1: 1, 0: 2, 3: 2}
    assert {e: x.coeff(e) for e in range(-3, 5) if x.coeff(e)} == want
    assert x.prec == float("inf")


@pytest.mark.parametrize("bad", ["", "2**u", "u^", "3^2", "v"])
def test_parse_scalar_rejects(bad):
    with pytest.raises(UsageError):
        cli.parse_scalar(F2, bad)


def test_parse_vector_dimension():
    v = cli.parse_vector(F2, "u;0", 2)
    assert v[1].is_zero()
    with pytest.raises(UsageError):
        cli.parse_vector(F2, "u", 2)


# -- verbs ----------------------------------------------------------------------


def test_zeta_json(capsys):
    code, doc = run_json(capsys, "zeta", "--n", "1", "--prec", "12")
    assert code == 0
    assert doc["schema_version"] == 1
    res = doc["results"][0]
    assert res["label"] == "zeta_A(1)"
    assert res["value"]["precision"] == 12
    x = LaurentSeries.from_json(F2, res["value"]["json"])
    assert x.coeff(0) == 1


def test_gamma_text(capsys):
    code, out, _ = run_text(capsys, "gamma", "--n", "3")
    assert code == 0
    assert "Gamma_3 = θ^2 + θ" in out


def test_log_coeffs_text(capsys):
    code, out, _ = run_text(capsys, "log-coeffs", "--i", "1")
    assert code == 0
    assert "(1)/(θ^2 + θ)" in out


def test_exp_coeffs_mzv_dimension(capsys):
    code, doc = run_json(capsys, "exp-coeffs", "--module", "mzv", "--i", "0")
    assert code == 0
    assert len(doc["results"][0]["matrix"]) == 5


def test_exp_and_log_values(capsys):
    code, doc = run_json(capsys, "exp", "--z", "u^2", "--prec", "20")
    assert code == 0 and doc["results"][0]["value"][0]["precision"] == 20
    code, doc = run_json(capsys, "log", "--z", "u^2", "--prec", "20")
    assert code == 0


def test_log_divergence_exit_code(capsys):
    code, doc = run_json(capsys, "log", "--z", "theta^3", "--prec", "20")
    assert code == 3
    assert doc["error"]["kind"] == "DivergentSeries"


def test_usage_error_exit_code(capsys):
    code, doc = run_json(capsys, "zeta", "--q", "6")
    assert code == 2 and doc["error"]["kind"] == "usage"
    code, _, err = run_text(capsys, "zeta", "--q", "6")
    assert code == 2 and "usage" in err


def test_verify_mzv_note_and_determinism(capsys):
    code, a = run_json(capsys, "verify", "mzv-13", "--prec", "20")
    assert code == 0 and a["passed"]
    assert any("ζ_A(1,3)" in n for n in a["reports"][0]["notes"])
    _, b = run_json(capsys, "verify", "mzv-13", "--prec", "20")
    assert a == b
    assert "elapsed_s" not in a["reports"][0]


def test_timing_flag(capsys):
    _, doc = run_json(capsys, "verify", "pairings", "--timing")
    assert "elapsed_s" in doc and "elapsed_s" in doc["reports"][0]


@pytest.mark.parametrize("sub", ["func-eq", "invertibility", "pairings", "residues", "compose"])
def test_verify_subcommands_pass(capsys, sub):
    code, doc = run_json(capsys, "verify", sub, "--n", "2", "--prec", "20")
    assert code == 0, doc
    assert doc["passed"]


def test_verify_logalg(capsys):
    code, doc = run_json(capsys, "verify", "logalg", "--n", "1", "--prec", "20")
    assert code == 0 and len(doc["reports"]) == 3


def test_verify_mellin_needs_hn(capsys):
    code, doc = run_json(capsys, "verify", "mellin", "--n", "3", "--prec", "12")
    assert code == 3 and doc["error"]["kind"] == "Unsupported"


def test_verify_mellin_with_hn_file(capsys):
    code, doc = run_json(capsys, "verify", "mellin", "--n", "3", "--prec", "20",
                         "--hn-file", H3, "--tdeg", "80")
    assert code == 0 and doc["passed"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "motivic", "gamma", "--n", "2", "--format",
                           "json"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"][0]["label"] == "Gamma_2"
