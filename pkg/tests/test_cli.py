import pytest

from mss_tr.bench.cli import main, read_config
from mss_tr.bench.runner import read_results_csv


def test_solve_success(capsys):
    assert main(["solve", "--problem", "ARWHEAD", "--dim", "50"]) == 0
    out = capsys.readouterr().out
    assert "converged = True" in out and "solver_name = L-MSSM-SC-INF" in out


@pytest.mark.parametrize("flags", [
    ["--norm", "sc-l2", "--init", "dense"],
    ["--norm", "trcg"],
    ["--hessian", "sr1", "--memory", "5", "--window", "7"],
    ["--rep", "gramfree", "--dependent-pairs", "skip"],
])
def test_solve_flag_combinations(flags, capsys):
    assert main(["solve", "--problem", "DIXMAANA", "--dim", "30", *flags]) == 0


def test_solve_nonconverged_exit_code(capsys):
    assert main(["solve", "--problem", "ARWHEAD", "--dim", "50", "--max-iter", "1"]) == 1


def test_solve_unknown_problem(capsys):
    assert main(["solve", "--problem", "NOPE"]) == 2
    assert "unknown problem" in capsys.readouterr().err


def test_bench_and_profile(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["bench", "--preset", "exp-ib", "--out", str(out), "--dim", "40",
                 "--problems", "ARWHEAD,engval1", "--jobs", "1"]) == 0
    for name in ("results.csv", "profile.csv", "profile.svg", "table.txt"):
        assert (out / name).is_file()
    recs = read_results_csv(out / "results.csv")
    assert {r.problem_name for r in recs} == {"ARWHEAD", "ENGVAL1"}
    assert "rho(32)" in capsys.readouterr().out
    svg = tmp_path / "again.svg"
    assert main(["profile", "--in", str(out / "results.csv"), "--out", str(svg),
                 "--csv", str(tmp_path / "again.csv")]) == 0
    assert svg.read_text().startswith("<svg")
    assert (tmp_path / "again.csv").read_text() == (out / "profile.csv").read_text()


def test_bench_problem_file(tmp_path, capsys):
    lst = tmp_path / "list.txt"
    lst.write_text("ARWHEAD:30\n# skip me\nCOSINE:30\n")
    out = tmp_path / "run"
    assert main(["bench", "--preset", "exp-ii", "--out", str(out),
                 "--problems", f"@{lst}", "--jobs", "1", "--max-iter", "200"]) == 0
    assert len(read_results_csv(out / "results.csv")) == 4


def test_config_file_supplies_defaults(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nproblem = ENGVAL1\ndim = 20\nnorm = sc-l2\n")
    assert main(["--config", str(cfg), "solve"]) == 0
    out = capsys.readouterr().out
    assert "problem_name = ENGVAL1" in out and "L-MSSM-SC-L2" in out
    # flags on the command line still win
    assert main(["--config", str(cfg), "solve", "--norm", "trcg"]) == 0
    assert "L-MSSM-trCG" in capsys.readouterr().out


def test_read_config_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("problem ENGVAL1\n")
    with pytest.raises(ValueError, match="bad.cfg:1"):
        read_config(bad)
    good = tmp_path / "good.cfg"
    good.write_text("max-iter = 7  # cap\n")
    assert read_config(good) == {"max_iter": "7"}


def test_bad_arguments_exit():
    with pytest.raises(SystemExit):
        main(["solve"])
    with pytest.raises(SystemExit):
        main(["bench", "--preset", "exp-x", "--out", "x"])


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "mss_tr", "solve", "--problem", "POWER",
                          "--dim", "20"], capture_output=True, text=True, timeout=120)
    assert res.returncode == 0, res.stderr
    assert "converged = True" in res.stdout
