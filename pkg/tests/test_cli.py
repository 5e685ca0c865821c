import csv
import io

import pytest

from bordered_toeplitz import cli
from bordered_toeplitz.numkernel import ConfigError, NumericError


def run(args):
    buf = io.StringIO()
    assert cli.run(args, buf) == cli.EXIT_OK
    return buf.getvalue()


def table(text, delimiter=","):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.reader(lines, delimiter=delimiter))


def test_parse_n():
    assert cli.parse_n(["100", "150,200", "300:500:100"]) == [100, 150, 200, 300, 400, 500]
    assert cli.parse_n(["2:4"]) == [2, 3, 4]
    assert cli.parse_n(None) == []
    with pytest.raises(ConfigError):
        cli.parse_n(["1:10:0"])
    with pytest.raises(ConfigError):
        cli.parse_n(["1:2:3:4"])


def test_config_errors_exit_2(capsys):
    assert cli.main(["ising-correlation", "--n", "20,10", "--digits", "30"]) == cli.EXIT_CONFIG
    assert "strictly increasing" in capsys.readouterr().err
    assert cli.main(["ising-correlation", "--n", "400"]) == cli.EXIT_CONFIG
    assert cli.main(["ising-correlation", "--n", "1"]) == cli.EXIT_CONFIG
    assert cli.main(["ising-correlation", "--n", "10", "--digits", "20"]) == cli.EXIT_CONFIG
    assert cli.main(["ising-correlation", "--n", "10", "--threads", "0"]) == cli.EXIT_CONFIG
    with pytest.raises(SystemExit) as exc:
        cli.main(["figure", "7"])
    assert exc.value.code == 2


def test_numeric_errors_exit_3(monkeypatch, capsys):
    def boom(cfg):
        raise NumericError("insufficient window")

    monkeypatch.setattr(cli, "ising_rows", boom)
    assert cli.main(["ising-correlation", "--n", "10"]) == cli.EXIT_NUMERIC
    assert "insufficient window" in capsys.readouterr().err


def test_self_test_gives_unit_ratio():
    rows = table(run(["ising-correlation", "--self-test", "--n", "5,10", "--digits", "30"]))
    head = rows[0]
    assert head[:4] == ["N", "D_N^B", "D_N", "ratio"]
    for r in rows[1:]:
        assert float(r[head.index("ratio")]) == 1.0


def test_ising_rows_and_formats(tmp_path):
    args = ["ising-correlation", "--n", "10,20", "--digits", "30"]
    text = run(args)
    rows = table(text)
    assert [r[0] for r in rows[1:]] == ["10", "20"]
    assert "e" not in "".join(",".join(r) for r in rows[1:])
    tsv = run(args + ["--format", "tsv"])
    assert table(tsv, "\t") == rows
    out = tmp_path / "t.csv"
    assert cli.run(args + ["--out", str(out)]) == cli.EXIT_OK
    assert out.read_text() == text
    assert b"\r" not in out.read_bytes()
    stamped = run(args + ["--stamp"])
    assert stamped.startswith("# generated ") and stamped.split("\n", 1)[1] == text


def test_threads_do_not_change_output():
    args = ["ising-correlation", "--n", "8,12,16", "--digits", "30"]
    assert run(args) == run(args + ["--threads", "3"])


def test_figure_footer_fits_all_points_when_few():
    text = run(["figure", "1", "--n", "20,30,40", "--digits", "30"])
    footer = [ln for ln in text.splitlines() if ln.startswith("#")]
    assert footer[0] == "# fit basis: g_0 N^0 + g_-1 N^-1 + g_-2 N^-2"
    assert footer[-1].startswith("# max residual = ")
    assert table(text)[0] == ["N", "G_N^A"]


def write_spec(tmp_path, body):
    p = tmp_path / "spec.txt"
    p.write_text(body)
    return str(p)


def test_bordered_det_pole_spec(tmp_path):
    spec = write_spec(tmp_path, "# k = 3/2 with a pole border\nphi = k\nk = 3/2\npsi = pole\nc = -1/2\n")
    rows = table(run(["bordered-det", spec, "--n", "10,20", "--digits", "30"]))
    head = rows[0]
    for r in rows[1:]:
        f_rat = float(r[head.index("F_inf_rational")])
        f_gen = float(r[head.index("F_inf_general")])
        assert abs(f_rat - (1.5 / 2.0) ** 0.5) < 1e-15 and abs(f_gen - f_rat) < 1e-15
    assert abs(float(rows[2][head.index("F_N")]) - float(rows[2][head.index("F_inf_general")])) < 1e-4


def test_bordered_det_matrix_mode(tmp_path):
    spec = write_spec(tmp_path, "phi = k\nk = 3/2\npsi = phi\n")
    rows = table(run(["bordered-det", spec, "--n", "12", "--digits", "30", "--bocg", "matrix"]))
    gap = rows[0].index("bocg_matrix_gap")
    assert abs(float(rows[1][gap])) < 1e-25


@pytest.mark.parametrize("body,needle", [
    ("phi = k\nk = 3/2\nflavour = mint\n", "unknown spec key"),
    ("phi = k\nk = 3/2\nk = 2\n", "duplicate key"),
    ("phi = k\njust words\n", "expected key = value"),
    ("phi = k\nk = three\n", "not a rational"),
    ("phi = spline\n", "unknown phi kind"),
])
def test_spec_errors(tmp_path, capsys, body, needle):
    spec = write_spec(tmp_path, body)
    assert cli.main(["bordered-det", spec, "--n", "5", "--digits", "30"]) == cli.EXIT_CONFIG
    assert needle in capsys.readouterr().err


def test_missing_spec_file(tmp_path):
    assert cli.main(["bordered-det", str(tmp_path / "nope"), "--n", "5"]) == cli.EXIT_CONFIG
