import subprocess
import sys

import pytest

from ranklimits.cli import main, parse_args, scale_grid


def run_cli(*args, env=None):
    return subprocess.run([sys.executable, "-m", "ranklimits", *args], capture_output=True, text=True, env=env)


def test_thresholds_table(capsys):
    assert main(["thresholds", "--n", "100", "--m", "10", "--p", "0.5", "--k0", "4"]) == 0
    out = capsys.readouterr().out
    assert "0.9210340372" in out and "0.09597051824" in out


@pytest.mark.parametrize("argv", [
    ["thresholds", "--n", "100", "--m", "10", "--p", "1.5"],
    ["thresholds", "--n", "1", "--m", "10", "--p", "0.5"],
    ["thresholds", "--n", "10", "--m", "10", "--p", "0.5", "--k0", "3"],
    ["phase", "--n", "10", "--m", "4", "--p", "0.5", "--scales", "1:2:1"],
    ["simulate", "--n", "12", "--m", "4", "--p", "0.5", "--estimators", "map"],
    ["connectivity", "--n", "10", "--m", "1", "--c", "50"],
    ["failure-event", "--n", "5", "--m", "2", "--p", "0.5", "--i1", "2", "--i2", "2"],
    ["census", "--n", "5", "--m", "2", "--p", "0.5", "--threads", "-1"],
])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        parse_args(argv)
    assert exc.value.code == 2
    assert "--" in capsys.readouterr().err


def test_scale_grid_syntax():
    assert scale_grid("0.1:2.0:3") == pytest.approx((0.1, 1.05, 2.0))
    assert scale_grid("1:1:1") == (1.0,)
    g = scale_grid("0.1:2.0:10")
    assert g[0] == 0.1 and g[-1] == 2.0 and len(g) == 10


def test_simulate_rows(capsys):
    assert main(["simulate", "--n", "6", "--m", "30", "--p", "0.8", "--scale", "1.0",
                 "--estimators", "moment,map", "--seed", "3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "trial,estimator,n,m,p,scale,exact,disagreement,tie_count"
    assert [ln.split(",")[1] for ln in lines[1:]] == ["moment", "map"]


def test_phase_to_file(tmp_path):
    out = tmp_path / "phase.csv"
    assert main(["phase", "--n", "8", "--m", "10", "--p", "0.5", "--scales", "0.1:2.0:4", "--trials", "20",
                 "--seed", "7", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 5


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n = 100\nm = 10\np = 0.5\nk0 = 8  # comment\n")
    assert main(["--config", str(cfg), "thresholds", "--csv"]) == 0
    row = capsys.readouterr().out.splitlines()[1].split(",")
    assert row[:4] == ["100", "10", "0.5", "8"]
    assert main(["--config", str(cfg), "thresholds", "--csv", "--k0", "4"]) == 0
    assert capsys.readouterr().out.splitlines()[1].split(",")[3] == "4"


def test_missing_config_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        parse_args(["--config", str(tmp_path / "nope.cfg"), "thresholds", "--n", "5", "--m", "1", "--p", "1"])
    assert exc.value.code == 2


def test_runtime_error_exit_1(tmp_path, capsys):
    bad = tmp_path / "m.txt"
    bad.write_text("3\n0.5 0.6\n")
    assert main(["census", "--n", "3", "--m", "2", "--p", "0.5", "--matrix-file", str(bad), "--trials", "5"]) == 1
    assert "error" in capsys.readouterr().err


def test_config_echo_on_stderr_and_stdout_clean():
    r = run_cli("connectivity", "--n", "50", "--m", "2", "--c", "1", "--trials", "50", "--seed", "11")
    assert r.returncode == 0
    assert r.stdout.startswith("n,m,c,p,trials,empirical,analytic,std_err\n")
    assert '"seed": 11' in r.stderr


def test_env_thread_fallback_same_bytes():
    import os
    args = ("census", "--n", "6", "--m", "4", "--p", "0.5", "--scale", "0.5", "--trials", "300", "--seed", "5")
    one = run_cli(*args, env={**os.environ, "RANKLIMITS_THREADS": "1"})
    many = run_cli(*args, env={**os.environ, "RANKLIMITS_THREADS": "6"})
    assert one.returncode == many.returncode == 0
    assert one.stdout == many.stdout
