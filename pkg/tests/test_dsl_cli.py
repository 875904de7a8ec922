import json
import subprocess
import sys

import pytest

from sheafcoh import dsl
from sheafcoh.cli import main as cli_main

ELLIPTIC_SRC = """\
ring R S p=32003 v=4;
matrix q [[x0^2 + x2^2 + x1*x3, x1^2 + x3^2 + x0*x2]] rowdegs [0];
module M = coker q;
use M | tate --lo -2 --hi 3 | betti;
"""

HM_SRC = """\
ring R E p=32003 v=5;
matrix phi [[e1*e4, e2*e0, e3*e1, e4*e2, e0*e3],
            [e2*e3, e3*e4, e4*e0, e0*e1, e1*e2]] rowdegs [4 4];
use phi | tate --lo -4 --hi 6 | betti;
"""


def test_parse_elliptic_quadrics_file():
    prog = dsl.parse(ELLIPTIC_SRC)
    assert prog.ring.kind == "S" and prog.ring.v == 4
    mod = prog.modules["M"]
    assert mod.generator_module.gen_degrees == (0,)
    assert mod.presentation.source.gen_degrees == (2, 2)


def test_parse_hm_matrix_file():
    prog = dsl.parse(HM_SRC)
    phi = prog.matrices["phi"]
    assert phi.source.gen_degrees == (2,) * 5
    assert phi.target.gen_degrees == (4, 4)
    assert phi.entries[0][0].render() == "e1*e4"
    assert phi.entries[0][1].render() == "32002*e0*e2"


def test_empty_program_is_parse_error():
    with pytest.raises(dsl.SyntaxDSLError):
        dsl.parse("")
    with pytest.raises(dsl.SyntaxDSLError):
        dsl.parse("ring R S p=32003 v=3;")


def test_lex_error_position():
    with pytest.raises(dsl.LexError) as err:
        dsl.parse("ring R S p=32003 v=3;\nmatrix @ bad;")
    assert err.value.line == 2


def test_homogeneity_errors():
    src = """ring R S p=32003 v=2;
matrix m [[x0 + x0^2]] rowdegs [0];
betti;
"""
    with pytest.raises(dsl.HomogeneityError):
        dsl.parse(src)
    src2 = """ring R S p=32003 v=2;
matrix m [[0]] rowdegs [0];
betti;
"""
    with pytest.raises(dsl.HomogeneityError):
        dsl.parse(src2)


def test_parse_render_roundtrip():
    prog = dsl.parse(ELLIPTIC_SRC)
    text = dsl.render_program(prog)
    again = dsl.parse(text)
    assert dsl.render_program(again) == text
    m1 = prog.matrices["q"]
    m2 = again.matrices["q"]
    assert [[e.render() for e in row] for row in m1.entries] == \
        [[e.render() for e in row] for row in m2.entries]


def test_cli_runs_file(tmp_path, capsys):
    f = tmp_path / "prog.sc"
    f.write_text(ELLIPTIC_SRC)
    rc = cli_main(["run", str(f)])
    out = capsys.readouterr().out
    assert rc == 0
    assert "h^1" in out and "12" in out


def test_cli_expr_json(capsys):
    rc = cli_main(["expr",
                   "example elliptic | tate --lo -1 --hi 2 --trunc 3 | betti",
                   "--format", "json"])
    out = capsys.readouterr().out
    assert rc == 0
    data = json.loads(out)
    assert data["schema"] == 1
    col0 = [c for c in data["columns"] if c["e"] == 0][0]
    assert col0["gens"] == [{"degree": 3, "rank": 4}, {"degree": 4, "rank": 1}]


def test_cli_exit_codes(capsys):
    assert cli_main(["expr", "ring R S p=32003"]) == 2
    assert cli_main(["expr", "betti"]) == 3
    assert cli_main(["expr", "example rnc --d 3 --k 0 | tate"]) == 4
    capsys.readouterr()


def test_cli_deterministic_output(tmp_path):
    f = tmp_path / "prog.sc"
    f.write_text(ELLIPTIC_SRC)
    outs = set()
    for _ in range(2):
        res = subprocess.run([sys.executable, "-m", "sheafcoh.cli", "run",
                              str(f)], capture_output=True, text=True)
        assert res.returncode == 0
        outs.add(res.stdout)
    assert len(outs) == 1


def test_cli_dualtate_and_cohomology(capsys):
    rc = cli_main(["expr",
                   "example elliptic | tate --lo -2 --hi 2 --trunc 3 | "
                   "dualtate | cohomology --jrange 0:3 --lrange -4:0"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "h^2" in out


def test_cli_regularity(capsys):
    rc = cli_main(["expr", "example elliptic | regularity"])
    out = capsys.readouterr().out
    assert rc == 0
    assert out.strip() == "regularity 2 certified true"
