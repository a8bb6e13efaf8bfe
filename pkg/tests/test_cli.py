from pathlib import Path

import pytest

from pertlp.cli import main

NETLIB = Path(__file__).parent / "data" / "netlib"


def test_gen_and_solve(tmp_path, capsys):
    assert main(["gen", "--count", "2", "--seed", "4", "--m-range", "10,25",
                 "--out", str(tmp_path)]) == 0
    files = sorted(tmp_path.glob("*.txt"))
    assert [f.name for f in files] == ["ts1_4.txt", "ts1_5.txt"]
    capsys.readouterr()
    assert main(["solve", str(files[0])]) == 0
    out, err = capsys.readouterr()
    assert out.startswith("k,mu_lambda,relres")
    assert "status=relres" in err


def test_solve_mps_unperturbed(tmp_path, capsys):
    target = tmp_path / "trace.csv"
    assert main(["solve", str(NETLIB / "afiro.mps"), "--unperturbed", "--out", str(target)]) == 0
    err = capsys.readouterr().err
    assert "m=27 n=51" in err
    assert target.read_text().startswith("k,")


def test_ratios_writes_reports(tmp_path, capsys):
    code = main(["ratios", "--count", "2", "--m-range", "10,25", "--grid", "2,4",
                 "--out", str(tmp_path)])
    assert code == 0
    assert {p.name for p in tmp_path.iterdir()} == {"rows.csv", "aggregates.csv", "ratios.svg"}
    out = capsys.readouterr().out
    assert out.splitlines()[0].startswith("algorithm\toracle\tk")


def test_crossover_verb(tmp_path):
    assert main(["crossover", "--count", "2", "--m-range", "10,25", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "rl_profile.svg").exists()


def test_ratios_netlib_verb(tmp_path):
    assert main(["ratios-netlib", "--mps", str(NETLIB / "afiro.mps"), "--out", str(tmp_path)]) == 0
    assert len((tmp_path / "rows.csv").read_text().splitlines()) == 1 + 2 * 2 * 10


def test_thresholds(capsys):
    assert main(["thresholds", "--samples", "300"]) == 0
    out = capsys.readouterr().out
    assert "epsilon (perturbed)" in out and "1.04" in out
    assert "0.0025" in out


@pytest.mark.parametrize("argv", [
    ["ratios", "--grid", "5,3"],
    ["crossover", "--zeta", "1.5"],
    ["solve", "/nonexistent/problem.mps"],
    ["ratios-netlib", "--mps", "/nonexistent"],
])
def test_config_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert "pertlp: error:" in capsys.readouterr().err


def test_bad_mps_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.mps"
    p.write_text("NAME X\nROWS\n N  OBJ\n Q  R1\nENDATA\n")
    assert main(["solve", str(p)]) == 2
    assert "bad.mps:4:" in capsys.readouterr().err


def test_usage_error_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["ratios", "--grid", "x"])
    assert info.value.code == 2


def test_strict_reports_failures(tmp_path):
    # a one-iteration cap cannot reach the tolerance
    assert main(["solve", str(NETLIB / "afiro.mps"), "--max-iters", "1", "--strict"]) == 1
    assert main(["solve", str(NETLIB / "afiro.mps"), "--max-iters", "1"]) == 0
