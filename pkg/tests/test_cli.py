"""End-to-end checks of the command line driver.

Everything funnels through cli.main(argv) in-process so exit codes, the JSON
printed to stdout, and the files left behind can all be asserted directly;
one subprocess test confirms the installed console script reaches the same
entry point.
"""

import json
import subprocess
import sys

import numpy as np
import pytest

from fwlab import cli

# Understated smoothness: the squared-distance objective has curvature 2 but
# the rule is told L = 1e-9, so the very first short step overshoots the
# certified envelope and the per-step audit must stop the run.
ENVELOPE_BREAKER = """\
name = "envelope-breaker"
t_max = 50
x0 = [0.0, 1.0]

[set]
kind = "l2ball"
center = [0.0, 0.0]
radius = 1.0

[objective]
kind = "distance-power"
anchor = [0.5, 0.0]
r = 2
L = 1e-9

[rule]
kind = "ss"
"""

# f(x0) = 0.5 * 1e308 * 4 overflows to inf at the start point.
OVERFLOW_BREAKER = """\
name = "overflow-breaker"
t_max = 50
x0 = [2.0]

[set]
kind = "l2ball"
center = [0.0]
radius = 2.0

[objective]
kind = "quadratic"
Q = [[1e308]]
c = [0.0]

[rule]
kind = "ss"
"""

# Isotropic quadratic over the unit box; the minimizer (0.3, 0.4, 0.2) sits
# strictly inside, f* = -0.29.
BOX_QUAD = """\
name = "box-quad"
t_max = 400
x0 = [0.9, 0.9, 0.9]

[set]
kind = "box"
lo = [0.0, 0.0, 0.0]
hi = [1.0, 1.0, 1.0]

[objective]
kind = "quadratic"
Q = [[2.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 2.0]]
c = [-0.6, -0.8, -0.4]
f_star = -0.29

[rule]
kind = "ss"
"""

SWEEP_DOC = """\
[defaults]
t_max = 60

[[runs]]
scenario = "heb-r2-ball"
rules = ["ss"]

[[runs]]
name = "tiny-ball"
x0 = [0.0, 0.5]

[runs.set]
kind = "l2ball"
center = [0.0, 0.0]
radius = 1.0

[runs.objective]
kind = "distance-power"
anchor = [0.25, 0.0]
r = 2

[runs.rule]
kind = "ss"
"""


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    monkeypatch.delenv("FWLAB_OUT", raising=False)


def write_config(tmp_path, text, name="config.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


# --- run / reproduce ---------------------------------------------------------


def test_run_scenario_writes_trace_and_summary(tmp_path, capsys):
    rc = cli.main(["run", "--scenario", "heb-r2-ball", "--rule", "ss",
                   "--t-max", "300", "--out", str(tmp_path)])
    assert rc == 0
    trace = tmp_path / "heb-r2-ball__ss.csv"
    summary_path = tmp_path / "heb-r2-ball__ss.summary.json"
    assert trace.is_file() and summary_path.is_file()
    out = capsys.readouterr().out
    assert str(trace) in out and str(summary_path) in out

    summary = json.loads(summary_path.read_text())
    assert summary["name"] == "heb-r2-ball__ss"
    assert summary["trace_csv"] == "heb-r2-ball__ss.csv"
    assert summary["stopped_at"] == 300
    assert summary["final"]["t"] == 300
    assert 0.0 <= summary["final"]["F"] <= summary["final"]["g"] + 1e-9
    assert summary["rule"] == {"label": "ss", "L": 2.0}
    # 300 steps is too short for the h-decay verdict but plenty for a fit.
    assert summary["h_decay"] is None
    assert isinstance(summary["fit"]["slope"], float)
    # 2-d problem, so the summary carries the path for plotting.
    assert summary["x0"] == [-0.8, 0.6]
    assert summary["trajectory"][0][0] == 0
    assert summary["trajectory"][-1][0] == 300
    assert all(len(row) == 3 for row in summary["trajectory"])


def test_repeat_runs_are_byte_identical(tmp_path):
    for sub in ("a", "b"):
        rc = cli.main(["run", "--scenario", "heb-r2-ball", "--rule", "ls",
                       "--t-max", "200", "--out", str(tmp_path / sub)])
        assert rc == 0
    name = "heb-r2-ball__ls"
    assert ((tmp_path / "a" / f"{name}.csv").read_bytes()
            == (tmp_path / "b" / f"{name}.csv").read_bytes())
    assert ((tmp_path / "a" / f"{name}.summary.json").read_bytes()
            == (tmp_path / "b" / f"{name}.summary.json").read_bytes())


def test_run_config_file(tmp_path):
    cfg = write_config(tmp_path, BOX_QUAD)
    rc = cli.main(["run", "--config", cfg, "--out", str(tmp_path)])
    assert rc == 0
    summary = json.loads((tmp_path / "box-quad.summary.json").read_text())
    assert summary["t_max"] == 400
    assert summary["final"]["F"] < 1e-4
    # 3-d run: no trajectory in the summary.
    assert "trajectory" not in summary
    header = (tmp_path / "box-quad.csv").read_text().splitlines()[0]
    assert header == "t,F,g,d,gamma,delta,h"


def test_cli_t_max_overrides_config(tmp_path):
    cfg = write_config(tmp_path, BOX_QUAD)
    rc = cli.main(["run", "--config", cfg, "--t-max", "7",
                   "--out", str(tmp_path)])
    assert rc == 0
    summary = json.loads((tmp_path / "box-quad.summary.json").read_text())
    assert summary["t_max"] == 7
    assert summary["final"]["t"] == 7


def test_gap_tol_override_stops_early(tmp_path):
    rc = cli.main(["run", "--scenario", "heb-r2-ball", "--rule", "ss",
                   "--t-max", "100000", "--gap-tol", "1e-3",
                   "--out", str(tmp_path)])
    assert rc == 0
    summary = json.loads(
        (tmp_path / "heb-r2-ball__ss.summary.json").read_text())
    assert summary["stopped_at"] < 100000
    assert summary["final"]["g"] <= 1e-3


def test_out_dir_from_environment(tmp_path, monkeypatch):
    env_dir = tmp_path / "from-env"
    monkeypatch.setenv("FWLAB_OUT", str(env_dir))
    rc = cli.main(["run", "--scenario", "heb-r2-ball", "--rule", "ss",
                   "--t-max", "20"])
    assert rc == 0
    env_csv = env_dir / "heb-r2-ball__ss.csv"
    assert len(env_csv.read_text().splitlines()) == 22  # header + t=0..20

    # An explicit --out beats the environment: the longer run must land in
    # flag_dir and leave the environment file untouched.
    flag_dir = tmp_path / "from-flag"
    rc = cli.main(["run", "--scenario", "heb-r2-ball", "--rule", "ss",
                   "--t-max", "30", "--out", str(flag_dir)])
    assert rc == 0
    flag_csv = flag_dir / "heb-r2-ball__ss.csv"
    assert len(flag_csv.read_text().splitlines()) == 32
    assert len(env_csv.read_text().splitlines()) == 22


def test_reproduce_runs_every_registered_rule(tmp_path):
    rc = cli.main(["reproduce", "openloop-family", "--t-max", "60",
                   "--out", str(tmp_path)])
    assert rc == 0
    for ell in (2, 3, 4):
        assert (tmp_path / f"openloop-family__ol{ell}.csv").is_file()
        summary = json.loads(
            (tmp_path / f"openloop-family__ol{ell}.summary.json").read_text())
        assert summary["ell"] == ell


# --- exit codes --------------------------------------------------------------


def test_missing_subcommand_is_a_config_error(capsys):
    assert cli.main([]) == 1
    assert "fwlab: config error:" in capsys.readouterr().err


def test_unknown_flag_exits_one(capsys):
    assert cli.main(["run", "--bogus"]) == 1
    assert "config error" in capsys.readouterr().err


def test_run_without_scenario_or_config_exits_one(capsys):
    assert cli.main(["run"]) == 1
    assert "needs --scenario or --config" in capsys.readouterr().err


def test_unknown_scenario_exits_one(capsys):
    assert cli.main(["run", "--scenario", "no-such-thing"]) == 1
    err = capsys.readouterr().err
    assert "config error" in err and "no-such-thing" in err


def test_unknown_rule_label_exits_one(tmp_path, capsys):
    rc = cli.main(["run", "--scenario", "heb-r2-ball", "--rule", "gd",
                   "--out", str(tmp_path)])
    assert rc == 1
    assert "config error" in capsys.readouterr().err


def test_config_missing_section_exits_one(tmp_path, capsys):
    cfg = write_config(tmp_path, 'name = "incomplete"\nx0 = [0.0]\n')
    assert cli.main(["run", "--config", cfg]) == 1
    assert "needs 'set'" in capsys.readouterr().err


def test_config_file_not_found_exits_one(tmp_path, capsys):
    assert cli.main(["run", "--config", str(tmp_path / "nope.toml")]) == 1
    assert "not found" in capsys.readouterr().err


def test_invalid_toml_exits_one(tmp_path, capsys):
    cfg = write_config(tmp_path, "name = [unclosed\n")
    assert cli.main(["run", "--config", cfg]) == 1
    assert "invalid TOML" in capsys.readouterr().err


def test_envelope_violation_exits_two(tmp_path, capsys):
    cfg = write_config(tmp_path, ENVELOPE_BREAKER)
    rc = cli.main(["run", "--config", cfg, "--out", str(tmp_path)])
    assert rc == 2
    err = capsys.readouterr().err
    assert "invariant violation" in err and "envelope" in err


def test_numeric_overflow_exits_three(tmp_path, capsys):
    cfg = write_config(tmp_path, OVERFLOW_BREAKER)
    with np.errstate(over="ignore", invalid="ignore"):
        rc = cli.main(["run", "--config", cfg, "--out", str(tmp_path)])
    assert rc == 3
    err = capsys.readouterr().err
    assert "numeric failure" in err and "non-finite" in err


# --- sweep -------------------------------------------------------------------


def test_sweep_merges_summaries(tmp_path):
    cfg = write_config(tmp_path, SWEEP_DOC, "sweep.toml")
    rc = cli.main(["sweep", "--config", cfg, "--out", str(tmp_path)])
    assert rc == 0
    index = json.loads((tmp_path / "sweep.summary.json").read_text())
    assert list(index) == ["heb-r2-ball__ss", "tiny-ball"]
    # [defaults] applies to both entries.
    assert index["heb-r2-ball__ss"]["t_max"] == 60
    assert index["tiny-ball"]["t_max"] == 60
    assert (tmp_path / "heb-r2-ball__ss.csv").is_file()
    assert (tmp_path / "tiny-ball.csv").is_file()


def test_sweep_parallel_matches_serial(tmp_path):
    for sub, workers in (("serial", "1"), ("parallel", "2")):
        cfg = write_config(tmp_path, SWEEP_DOC, f"sweep-{sub}.toml")
        rc = cli.main(["sweep", "--config", cfg, "--workers", workers,
                       "--out", str(tmp_path / sub)])
        assert rc == 0
    assert ((tmp_path / "serial" / "sweep.summary.json").read_bytes()
            == (tmp_path / "parallel" / "sweep.summary.json").read_bytes())


def test_sweep_requires_runs_array(tmp_path, capsys):
    cfg = write_config(tmp_path, "[defaults]\nt_max = 5\n")
    assert cli.main(["sweep", "--config", cfg]) == 1
    assert "[[runs]]" in capsys.readouterr().err


# --- lds-check ---------------------------------------------------------------


def test_lds_check_ball_reports_one_half(tmp_path, capsys):
    report_path = tmp_path / "ball.json"
    rc = cli.main(["lds-check", "--set", "l2ball", "--n-x", "400",
                   "--n-g", "400", "--json", str(report_path)])
    assert rc == 0
    captured = capsys.readouterr()
    report = json.loads(captured.out)
    assert report["set"]["kind"] == "l2ball"
    assert report["M"] == [0.0, -1.0]
    (est,) = report["estimates"]
    assert est["rho"] == 0.3
    # The chord ratio on the ball has infimum 1/2 on the cap; near-antipodal
    # sample pairs can round a few 1e-7 below it.
    assert est["A_hat"] == pytest.approx(0.5, abs=1e-4)
    assert set(est["witness"]) == {"x", "g", "s", "ratio", "dist_to_M"}
    # The file holds exactly what was printed.
    assert report_path.read_text() == captured.out
    assert "wrote" in captured.err


def test_lds_check_rho_sweep(capsys):
    rc = cli.main(["lds-check", "--set", "l2ball", "--rho-sweep", "0.3,0.1",
                   "--n-x", "200", "--n-g", "200"])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert [e["rho"] for e in report["estimates"]] == [0.3, 0.1]
    for est in report["estimates"]:
        assert est["A_hat"] == pytest.approx(0.5, abs=1e-4)


def test_lds_check_flat_set_with_uc_bruteforce(capsys):
    rc = cli.main(["lds-check", "--set", "box", "--n-x", "200",
                   "--n-g", "200", "--uc-bruteforce"])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    # Chords along the flat face kill the certificate both ways.
    assert report["estimates"][0]["A_hat"] <= 1e-9
    assert report["uc_alpha_hat"] == 0.0
    assert report["certificate"] is None


def test_lds_check_custom_reference_point(capsys):
    rc = cli.main(["lds-check", "--set", "l2ball", "--M", "0.0,-1.0",
                   "--n-x", "100", "--n-g", "100"])
    assert rc == 0
    assert json.loads(capsys.readouterr().out)["M"] == [0.0, -1.0]


def test_lds_check_bad_inputs_exit_one(capsys):
    assert cli.main(["lds-check", "--set", "moebius"]) == 1
    assert "unknown --set" in capsys.readouterr().err
    assert cli.main(["lds-check", "--set", "l2ball", "--M", "pole"]) == 1
    assert "comma floats" in capsys.readouterr().err
    assert cli.main(["lds-check"]) == 1
    assert "--set" in capsys.readouterr().err


# --- rate-fit ----------------------------------------------------------------


@pytest.fixture()
def short_trace(tmp_path):
    rc = cli.main(["run", "--scenario", "heb-r2-ball", "--rule", "ss",
                   "--t-max", "500", "--out", str(tmp_path)])
    assert rc == 0
    return tmp_path / "heb-r2-ball__ss.csv"


def test_rate_fit_reports_slope(short_trace, tmp_path, capsys):
    report_path = tmp_path / "fit.json"
    rc = cli.main(["rate-fit", str(short_trace), "--json", str(report_path)])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert report["trace"] == str(short_trace)
    assert report["n_records"] == 501
    assert report["fit"]["slope"] < -0.5
    assert report["h_decay"] is None
    assert json.loads(report_path.read_text()) == report


def test_rate_fit_explicit_window(short_trace, capsys):
    rc = cli.main(["rate-fit", str(short_trace), "--window", "100", "500"])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert report["fit"]["window"] == [100.0, 500.0]


def test_rate_fit_bad_inputs_exit_one(short_trace, tmp_path, capsys):
    assert cli.main(["rate-fit", str(tmp_path / "missing.csv")]) == 1
    assert "config error" in capsys.readouterr().err
    # Window beyond the data leaves nothing to fit.
    rc = cli.main(["rate-fit", str(short_trace),
                   "--window", "1000000", "10000000"])
    assert rc == 1
    assert "cannot fit" in capsys.readouterr().err


# --- console script ----------------------------------------------------------


def test_console_script_smoke(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "fwlab.cli", "run", "--scenario",
         "heb-r2-ball", "--rule", "ss", "--t-max", "20",
         "--out", str(tmp_path)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "heb-r2-ball__ss.csv").is_file()

    proc = subprocess.run(["fwlab", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "run" in proc.stdout and "lds-check" in proc.stdout
