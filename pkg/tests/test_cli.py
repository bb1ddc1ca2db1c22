import pandas as pd
import pytest

import app_config
import cli
import experiments
from experiments import MultiplexingRate
from sim_errors import NumericalError

OUTAGE_ARGS = [
    "outage", "--scheme", "successive", "--snr", "0:30:5", "--L", "20",
    "--trials", "100000", "--seed", "42", "--mux", "1",
]


def test_parse_outage():
    cmd = cli.parse_args(OUTAGE_ARGS)
    config = cmd.config
    assert cmd.subcommand == "outage"
    assert config.scheme == "successive_ml"
    assert config.snr_db == (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    assert (config.L, config.trials, config.master_seed) == (20, 100_000, 42)
    assert config.rate_mode == MultiplexingRate(1.0, 1.0)
    assert config.geometry.rtilde == pytest.approx(app_config.DEFAULT_RTILDE)
    assert config.relay_mode == "perfect"
    assert cmd.output is None


def test_parse_fixed_rate_and_options():
    cmd = cli.parse_args([
        "outage", "--scheme", "stc", "--snr", "0:10:1", "--rate", "2", "--rtilde", "0.05",
        "--relay", "constrained", "--workers", "0", "--out", "-",
    ])
    assert cmd.config.rate_mode == experiments.FixedRate(2.0)
    assert cmd.config.geometry.rtilde == 0.05
    assert cmd.config.relay_mode == "constrained"
    assert cmd.config.workers == 0
    assert cmd.output is None


def test_parse_dmt_needs_no_simulation_flags():
    cmd = cli.parse_args(["dmt", "--curve", "stc"])
    assert cmd.curves == ("stc",)
    assert cmd.config is None
    assert cli.parse_args(["dmt"]).curves == app_config.DMT_CURVE_NAMES


@pytest.mark.parametrize("argv", [
    ["outage", "--scheme", "stc", "--snr", "30:0:5", "--mux", "1"],
    ["outage", "--scheme", "stc", "--snr", "0:30", "--mux", "1"],
    ["outage", "--scheme", "stc", "--mux", "1"],
    ["outage", "--scheme", "stc", "--snr", "0:30:5"],
    ["outage", "--scheme", "stc", "--snr", "0:30:5", "--mux", "1", "--rate", "2"],
    ["outage", "--scheme", "stc", "--snr", "0:30:5", "--mux", "1", "--trials", "0"],
    ["outage", "--scheme", "stc", "--snr", "0:30:5", "--mux", "1", "--seed", "-4"],
    ["outage", "--scheme", "stc", "--snr", "0:30:5", "--mux", "1", "--L", "0"],
    ["outage", "--scheme", "alamouti", "--snr", "0:30:5", "--mux", "1"],
    ["outage", "--scheme", "stc", "--snr", "0:30:5", "--mux", "1", "--bogus"],
    ["constraint", "--scheme", "direct", "--snr", "0:30:5"],
    ["dmt", "--curve", "alamouti"],
    ["diversity"],
])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as excinfo:
        cli.parse_args(argv)
    assert excinfo.value.code == cli.EXIT_USAGE
    assert capsys.readouterr().err


def test_help_names_units(capsys):
    with pytest.raises(SystemExit) as excinfo:
        cli.parse_args(["outage", "--help"])
    assert excinfo.value.code == 0
    text = capsys.readouterr().out
    assert "dB" in text
    assert "bits/slot" in text
    assert "linear" in text


def test_dmt_stc_breakpoints(tmp_path):
    out = tmp_path / "dmt.csv"
    assert cli.main(["dmt", "--curve", "stc", "--out", str(out)]) == cli.EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "curve,kind,r,d"
    for row in ("stc,breakpoint,0,6", "stc,breakpoint,0.5,3", "stc,breakpoint,1,1", "stc,breakpoint,1.5,0"):
        assert row in lines
    assert "stc,sample,0.75,2" in lines


def test_dmt_to_stdout(capsys):
    assert cli.main(["dmt", "--curve", "upper", "--step", "0.5"]) == cli.EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert "upper,sample,0.5,2" in out


def test_diversity_of_synthetic_curve(tmp_path):
    grid = experiments.snr_grid(0, 30, 2)
    p_hat = [10.0 ** (-4.0 * db / 10.0) for db in grid]
    frame = pd.DataFrame({
        "snr_db": grid, "scheme": "synthetic", "rate_mode": "mux", "rate_value": 0.5,
        "L": 20, "rtilde": 0.1, "trials": 10**9,
        "outage_count": [int(p * 10**9) for p in p_hat],
        "p_hat": p_hat, "ci_low": p_hat, "ci_high": p_hat,
    })
    source, target = tmp_path / "outage.csv", tmp_path / "diversity.csv"
    experiments.write_csv(frame, source)

    assert cli.main(["diversity", "--in", str(source), "--out", str(target)]) == cli.EXIT_OK
    result = pd.read_csv(target)
    assert list(result.columns) == list(app_config.DIVERSITY_CSV_COLUMNS)
    assert len(result) == len(grid) - 2
    assert result["d_hat"].between(3.99, 4.01).all()


def test_outage_rerun_is_byte_identical(tmp_path):
    argv = ["outage", "--scheme", "dblast", "--snr", "0:20:10", "--L", "3",
            "--trials", "150", "--seed", "9", "--mux", "0.5"]
    first, second = tmp_path / "1.csv", tmp_path / "2.csv"
    assert cli.main(argv + ["--out", str(first)]) == cli.EXIT_OK
    assert cli.main(argv + ["--out", str(second)]) == cli.EXIT_OK
    assert first.read_bytes() == second.read_bytes()


def test_constraint_subcommand(tmp_path):
    out = tmp_path / "constraint.csv"
    argv = ["constraint", "--scheme", "stc", "--snr", "0:20:10", "--trials", "100", "--out", str(out)]
    assert cli.main(argv) == cli.EXIT_OK
    frame = pd.read_csv(out)
    assert set(frame["scheme"]) == {"stc:constraint"}


def test_numerical_failure_exits_1(monkeypatch, capsys):
    def fail(H, etas):
        raise NumericalError("Log-determinant is not finite.", eta=100.0)

    monkeypatch.setattr(experiments, "mutual_information_sweep", fail)
    code = cli.main(["outage", "--scheme", "stc", "--snr", "0:20:10", "--trials", "10", "--mux", "1"])
    assert code == cli.EXIT_RUNTIME
    err = capsys.readouterr().err
    assert "trial 0" in err
    assert "SNR 20 dB" in err


def test_missing_input_exits_1(tmp_path, capsys):
    code = cli.main(["diversity", "--in", str(tmp_path / "absent.csv")])
    assert code == cli.EXIT_RUNTIME
    assert "relaysim:" in capsys.readouterr().err


def test_log_file(tmp_path):
    log_path = tmp_path / "logs" / "run.log"
    cli.main(["dmt", "--curve", "stc", "--out", str(tmp_path / "d.csv"), "--log-file", str(log_path)])
    assert log_path.exists()


def test_diversity_leaves_input_untouched(tmp_path):
    source = tmp_path / "outage.csv"
    assert cli.main(["outage", "--scheme", "mimo22", "--snr", "0:10:5", "--trials", "2000",
                     "--mux", "1", "--out", str(source)]) == cli.EXIT_OK
    before = source.read_bytes()
    assert cli.main(["diversity", "--in", str(source), "--out", str(tmp_path / "d.csv")]) == cli.EXIT_OK
    assert source.read_bytes() == before


@pytest.mark.parametrize("content", ["", "snr_db,scheme\n\"0,stc\n", None])
def test_unreadable_outage_csv_exits_1(tmp_path, capsys, content):
    source = tmp_path / "bad.csv"
    if content is None:
        header = ",".join(app_config.OUTAGE_CSV_COLUMNS)
        content = header + "\n0,stc,mux,1,4,0.1,abc,3,0.1,0.05,0.2\n"
    source.write_text(content)
    assert cli.main(["diversity", "--in", str(source)]) == cli.EXIT_RUNTIME
    assert "bad.csv" in capsys.readouterr().err
