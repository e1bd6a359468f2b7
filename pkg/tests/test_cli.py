import json
import subprocess
import sys

import pytest

from runlength_lab import cli
from runlength_lab.cli import ConfigError, main, parse_config
from runlength_lab.tables import ExperimentTable


@pytest.fixture(autouse=True)
def no_env_out(monkeypatch):
    monkeypatch.delenv(cli.OUT_ENV, raising=False)


def write_toml(tmp_path, text):
    p = tmp_path / "run.toml"
    p.write_text(text)
    return str(p)


def test_minimal_config(tmp_path):
    cfg = parse_config(["--config", write_toml(tmp_path, 'command = "orbit"\nalpha = 0.5\nn = 100\nseed = 1\n')])
    assert cfg.command == "orbit" and cfg.alpha == [0.5] and cfg.n == [100] and cfg.seed == 1


def test_flags_override_file(tmp_path):
    path = write_toml(tmp_path, 'command = "scaling"\nalpha = 0.5\ntrials = 7\nburn-in = 5\n')
    cfg = parse_config(["--config", path, "--trials", "3", "--n", "10,100"])
    assert cfg.trials == 3 and cfg.n == [10, 100] and cfg.burn_in == 5


@pytest.mark.parametrize(
    "argv, key",
    [
        (["orbit", "--alpha", "1.2"], "alpha"),
        (["windows", "--alpha", "0.5", "--alpha1", "0.6"], "alpha1"),
        (["scaling", "--n", "100,10"], "n"),
        (["scaling", "--trials", "many"], "trials"),
        (["density", "--grading", "spiral"], "grading"),
        (["report"], "input"),
        (["blocks", "--alpha", "0.6", "--variant", "one"], "epsilon"),
        ([], "command"),
    ],
)
def test_rejections_name_key(argv, key, capsys):
    with pytest.raises(ConfigError) as exc:
        parse_config(argv)
    assert exc.value.key == key
    assert main(argv) == cli.EXIT_CONFIG
    assert f"'{key}'" in capsys.readouterr().err


def test_unknown_file_key(tmp_path, capsys):
    path = write_toml(tmp_path, 'command = "orbit"\ncolour = "blue"\n')
    assert main(["--config", path]) == cli.EXIT_CONFIG
    assert "'colour'" in capsys.readouterr().err


def test_type_mismatch_in_file(tmp_path):
    with pytest.raises(ConfigError, match="'seed'"):
        parse_config(["--config", write_toml(tmp_path, 'command = "orbit"\nseed = "abc"\n')])


def test_orbit_rows(tmp_path):
    assert main(["orbit", "--alpha", "0.5", "--n", "3", "--x0", "0.75", "--out", str(tmp_path)]) == 0
    tab = ExperimentTable.read(tmp_path / "orbit.csv")
    assert tab.rows == [(0, 0.75, 1), (1, 0.5, 1), (2, 0.0, 0)]
    assert tab.columns == ("k", "point", "digit")
    assert ExperimentTable.read(tmp_path / "orbit.json") == tab


def test_every_file_carries_hash_and_seed(tmp_path):
    argv = ["scaling", "--n", "100,1000", "--trials", "3", "--seed", "11", "--out", str(tmp_path)]
    assert main(argv) == 0
    h = parse_config(argv).config_hash()
    for name in ("scaling.csv", "scaling.json", "scaling.config.json"):
        text = (tmp_path / name).read_text()
        assert h in text
    tab = ExperimentTable.read(tmp_path / "scaling.csv")
    assert tab.metadata["master_seed"] == 11 and tab.metadata["config_hash"] == h
    echo = json.loads((tmp_path / "scaling.config.json").read_text())
    assert echo["config"]["trials"] == 3


def test_hash_ignores_output_location():
    a = parse_config(["orbit", "--out", "x"]).config_hash()
    b = parse_config(["orbit", "--out", "y", "--format", "csv"]).config_hash()
    c = parse_config(["orbit", "--seed", "2"]).config_hash()
    assert a == b != c


def test_env_overrides_out(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "env"))
    assert main(["orbit", "--n", "5", "--out", str(tmp_path / "flag")]) == 0
    assert (tmp_path / "env" / "orbit.csv").exists()
    assert not (tmp_path / "flag").exists()


def test_rerun_byte_identical(tmp_path):
    argv = ["scaling", "--n", "100,1000", "--trials", "4", "--out", str(tmp_path)]
    outs = []
    for _ in range(2):
        assert main(argv) == 0
        outs.append({f.name: f.read_bytes() for f in tmp_path.iterdir()})
    assert outs[0] == outs[1]
    assert set(outs[0]) == {"scaling.csv", "scaling.json", "scaling.config.json"}


def test_density_schema(tmp_path):
    assert main(["density", "--cells", "256", "--out", str(tmp_path), "--format", "csv"]) == 0
    tab = ExperimentTable.read(tmp_path / "density.csv")
    assert tab.columns == ("cell_lo", "cell_hi", "mass", "density")
    assert len(tab) == 256
    assert sum(tab.column("mass")) == pytest.approx(1.0, abs=1e-12)
    assert not (tmp_path / "density.json").exists()


@pytest.mark.parametrize(
    "argv",
    [
        ["runlength", "--n", "100,1000", "--trials", "2"],
        ["cylinder", "--cells", "256", "--k-max", "30"],
        ["correlation", "--cells", "512", "--max-lag", "16", "--lag-hi", "16"],
        ["correlation", "--method", "montecarlo", "--samples", "2000", "--orbits", "2", "--max-lag", "4"],
        ["windows", "--n", "100,1000", "--trials", "2", "--mode", "one"],
        ["blocks", "--n", "10000,100000", "--trials", "5"],
        ["density", "--method", "birkhoff", "--n", "100000", "--cells", "128"],
    ],
)
def test_commands_run(argv, tmp_path):
    assert main(argv + ["--out", str(tmp_path)]) == 0
    cmd = argv[0]
    tab = ExperimentTable.read(tmp_path / f"{cmd}.json")
    assert len(tab) > 0
    assert ExperimentTable.read(tmp_path / f"{cmd}.csv") == tab


def test_report_medians(tmp_path):
    assert main(["scaling", "--n", "100,1000", "--trials", "5", "--out", str(tmp_path)]) == 0
    src = ExperimentTable.read(tmp_path / "scaling.csv")
    assert main(["report", "--input", str(tmp_path / "scaling.csv"), "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "report_summary.json").read_text())
    rows = {(r[1], r[3]): r[4] for r in doc["rows"]}
    import numpy as np

    assert rows[(1000, "r_n:median")] == float(np.median(src.values("r_n", 1000)))
    assert rows[(100, "R_n:count")] == 5.0


def test_report_rejects_non_long_table(tmp_path):
    main(["orbit", "--n", "5", "--out", str(tmp_path)])
    assert main(["report", "--input", str(tmp_path / "orbit.csv"), "--out", str(tmp_path)]) == cli.EXIT_CONFIG


def test_io_error_exit(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["orbit", "--n", "5", "--out", str(blocker / "sub")]) == cli.EXIT_IO


def test_partial_outputs_removed(tmp_path, monkeypatch):
    def broken(self, path, fmt=None):
        if str(path).endswith(".json"):
            raise OSError("disk full")
        path.write_text("partial")

    monkeypatch.setattr(ExperimentTable, "write", broken)
    assert main(["orbit", "--n", "5", "--out", str(tmp_path)]) == cli.EXIT_IO
    assert list(tmp_path.iterdir()) == []


@pytest.mark.parametrize(
    "exc, code",
    [
        (cli.SolverError("no root", index=3), cli.EXIT_SOLVER),
        (cli.ConvergenceError("stuck", residual=1.0), cli.EXIT_CONVERGENCE),
    ],
)
def test_solver_exit_codes(exc, code, tmp_path, monkeypatch):
    def fail(cfg):
        raise exc

    monkeypatch.setitem(cli._DISPATCH, "density", fail)
    assert main(["density", "--out", str(tmp_path)]) == code


def test_plot_deterministic(tmp_path):
    pytest.importorskip("matplotlib")
    for d in ("a", "b"):
        assert main(["orbit", "--n", "50", "--plot", "--out", str(tmp_path / d)]) == 0
    svg = (tmp_path / "a" / "orbit.svg").read_bytes()
    assert svg == (tmp_path / "b" / "orbit.svg").read_bytes()
    assert parse_config(["orbit", "--n", "50"]).config_hash().encode() in svg


def test_console_entry_point(tmp_path):
    r = subprocess.run(
        [sys.executable, "-m", "runlength_lab.cli", "orbit", "--n", "3", "--x0", "0.75", "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert r.returncode == 0, r.stderr
    assert "orbit.csv" in r.stdout
