import io
import json
import subprocess
import sys

import pytest

from btnf.cli import (
    EXIT_DEGENERATE, EXIT_NOT_BT, EXIT_OK, EXIT_PARSE, EXIT_RANK, EXIT_UNSUPPORTED, ParseError,
    RunConfig, main, parse_example, parse_system, render_system, run,
)
from btnf.rational import Q

S1R3 = "dx = x*y + y^4 + 2*x^2*y^3; dy = -x + y^2 - x^3"
PARAM = ("dx = x*y + y^4 + m1 + m2*y + m3*y^2 + m4*y^3 + m5*y^5 + m6*y^8;"
         " dy = -x + y^2 + 2*y^3 + y^4")


def call(text, **kw):
    out, err = io.StringIO(), io.StringIO()
    code = run(RunConfig(**kw), text, out, err)
    return code, out.getvalue(), err.getvalue()


def test_parse_system():
    sys_ = parse_system("dx = 1/2*x^2*y - y; dy = -x + 3*y^2")
    assert sys_.dx == {(2, 1, ()): Q(1, 2), (0, 1, ()): Q(-1)}
    assert sys_.dy == {(1, 0, ()): Q(-1), (0, 2, ()): Q(3)}


def test_parse_parameters():
    sys_ = parse_system("dx = y + mu*y^2; dy = -x + nu", ["mu", "nu"])
    assert sys_.p == 2
    assert sys_.dx[(0, 2, (1, 0))] == 1 and sys_.dy[(0, 0, (0, 1))] == 1


@pytest.mark.parametrize("text, line, col", [
    ("dx = 0.5*x; dy = -x", 1, 6),
    ("dx = x*z; dy = -x", 1, 8),
    ("dx = x\ndy = -x + y^2", 2, 1),
    ("dx = x; dx = y", 1, 9),
    ("dx = x", 1, 7),
    ("dx = 1/0*x; dy = -x", 1, 8),
])
def test_parse_errors_have_positions(text, line, col):
    with pytest.raises(ParseError) as info:
        parse_system(text)
    assert (info.value.line, info.value.column) == (line, col)


def test_parse_example():
    assert parse_example("a = 1; b = -1/3; c = 0; d = 2") == {
        "a": 1, "b": Q(-1, 3), "c": 0, "d": 2}
    with pytest.raises(ParseError):
        parse_example("a = 1; b = 2")


def test_render_round_trip():
    sys_ = parse_system(S1R3)
    assert parse_system(render_system(sys_)) == sys_


@pytest.mark.parametrize("text, mode, code", [
    (S1R3, "orbital", EXIT_OK),
    ("dx = x*y; dy = -x +", "orbital", EXIT_PARSE),
    ("dx = x; dy = y", "orbital", EXIT_NOT_BT),
    ("dx = x*y + y^3; dy = -x + y^2", "orbital", EXIT_UNSUPPORTED),
    ("dx = y^6; dy = -x", "orbital", EXIT_DEGENERATE),
])
def test_exit_codes(text, mode, code):
    assert call(text, mode=mode)[0] == code


def test_rank_exit_code():
    code, _, err = call("dx = x*y + y^4 + m1*y; dy = -x + y^2 + 2*y^3", mode="parametric",
                        params=["m1"])
    assert code == EXIT_RANK
    assert "deficient" in err


def test_parametric_needs_params():
    assert call(S1R3, mode="parametric")[0] == EXIT_PARSE


def test_json_round_trip_is_fixed_point():
    code, out, _ = call(S1R3, mode="orbital", degree=9, output="json", emit_log=True)
    assert code == EXIT_OK
    first = json.loads(out)
    assert first["s"] == 1 and first["r1"] == 3
    assert all(t["beta_power"] == 0 for t in first["terms"])
    code, out, _ = call(first["system"], mode="orbital", degree=9, output="json", emit_log=True)
    again = json.loads(out)
    assert again["terms"] == first["terms"]
    assert all(e["kind"] == "truncate" for e in again["log"])


def test_text_and_json_agree():
    _, text, _ = call(S1R3, mode="orbital", degree=8)
    _, js, _ = call(S1R3, mode="orbital", degree=8, output="json")
    for t in json.loads(js)["terms"]:
        assert f"{t['basis']}^{t['l']}_{t['k']}: {t['coeff']}" in text


def test_certificate_output():
    _, js, _ = call(S1R3, mode="orbital", degree=9, output="json", emit_certificate=True)
    cert = json.loads(js)["certificate"]
    assert cert and all(c["holds"] for c in cert)


def test_parametric_json_has_rank():
    code, out, err = call(PARAM, mode="parametric", params=[f"m{i}" for i in range(1, 7)],
                          output="json")
    assert code == EXIT_OK, err
    rank = json.loads(out)["rank"]
    assert rank["ok"] and rank["rank"] == rank["required"]


def test_example_mode():
    code, out, _ = call("a = 1; b = 1; c = 0; d = 0", mode="example", output="json")
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["a_tilde"]["3"] == "1/4"
    assert data["branch"] == "r1=3"


def test_main_reads_file(tmp_path, capsys):
    path = tmp_path / "sys.txt"
    path.write_text(S1R3)
    assert main([str(path), "--mode", "classical", "--degree", "5"]) == EXIT_OK
    assert "mode: classical" in capsys.readouterr().out


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "btnf", "--mode", "simplest", "--json"],
                          input=S1R3, capture_output=True, text=True)
    assert proc.returncode == EXIT_OK
    assert json.loads(proc.stdout)["mode"] == "simplest"
