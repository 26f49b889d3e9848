import json
import subprocess
import sys

import numpy as np
import pytest

from genea_sel import __version__
from genea_sel.cli import ConfigError, main, parse_h_grid


def _summary(out):
    return json.loads((out / "summary.json").read_text())


def test_h_grid_parsing():
    assert np.allclose(parse_h_grid("0:1:5", 3), [0, 0.25, 0.5, 0.75, 1])
    assert np.allclose(parse_h_grid("0.5,1,2", 3), [0.5, 1, 2])
    assert parse_h_grid(None, 2.0)[-1] == 2.0
    for bad in ("1,0.5", "a:b:c", "-1,2", ""):
        with pytest.raises(ConfigError):
            parse_h_grid(bad, 1.0)


def test_simulate_moran_writes_outputs(tmp_path):
    out = tmp_path / "m"
    code = main(["simulate-moran", "--n", "20", "--reps", "30", "--t", "3", "--h-grid", "0:3:7",
                 "--workers", "1", "--out", str(out)])
    assert code == 0
    s = _summary(out)
    assert s["version"] == __version__ and s["seed"] == 0 and s["passed"]
    assert "seconds" in s["timings"]
    cfg = json.loads((out / "config.json").read_text())
    assert cfg["n"] == 20 and cfg["reps"] == 30
    header = (out / "cdf.csv").read_text().splitlines()[0]
    assert header == "h,offdiag,offdiag_band,full_matrix"


def test_same_seed_gives_identical_csv(tmp_path):
    args = ["simulate-moran", "--n", "15", "--reps", "20", "--t", "2", "--seed", "7", "--workers", "1"]
    main(args + ["--out", str(tmp_path / "a")])
    main(args + ["--out", str(tmp_path / "b")])
    for name in ("cdf.csv", "replicates.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_flags_override_config_file_which_overrides_defaults(tmp_path):
    conf = tmp_path / "c.yaml"
    conf.write_text("n: 12\nreps: 9\nt: 1.5\n")
    out = tmp_path / "o"
    assert main(["simulate-moran", "--config", str(conf), "--reps", "11", "--workers", "1",
                 "--out", str(out)]) == 0
    cfg = json.loads((out / "config.json").read_text())
    assert (cfg["n"], cfg["reps"], cfg["t"], cfg["format"]) == (12, 11, 1.5, "csv")


def test_output_root_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("GENEA_SEL_OUT", str(tmp_path / "root"))
    assert main(["analytic-curves", "--h-grid", "0:2:5"]) == 0
    assert (tmp_path / "root" / "analytic-curves" / "curves.csv").exists()


def test_json_format(tmp_path):
    out = tmp_path / "e"
    assert main(["equilibrium", "--alpha", "1", "--reps", "20000", "--format", "json", "--out", str(out)]) == 0
    table = json.loads((out / "density.json").read_text())
    assert table["columns"] == ["x", "density", "cdf"]
    assert _summary(out)["gates"]["closed_vs_quadrature"]


@pytest.mark.parametrize("argv", [
    ["simulate-moran", "--alpha", "-1"],
    ["simulate-moran", "--h-grid", "2,1"],
    ["simulate-moran", "--reps", "0"],
    ["reproduce-figures", "--theta1", "0.3"],
    ["equilibrium", "--alpha", "1,2"],
])
def test_configuration_errors_exit_with_two(argv, tmp_path):
    assert main(argv + ["--out", str(tmp_path / "x")]) == 2


def test_unknown_config_key_exits_with_two(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text('{"bogus": 1}')
    assert main(["simulate-moran", "--config", str(conf), "--out", str(tmp_path / "x")]) == 2


def test_verify_generators_and_negative_control(tmp_path, capsys):
    assert main(["verify-generators", "--out", str(tmp_path / "ok")]) == 0
    s = _summary(tmp_path / "ok")
    assert len(s["gates"]) == 9 * 4 + 2 * 4
    code = main(["verify-generators", "--families", "2", "--corrupt", "Ybar^m sum y^2 | mut",
                 "--out", str(tmp_path / "bad")])
    assert code == 1
    assert "difference:" in capsys.readouterr().out


def test_simulate_families_and_sde(tmp_path):
    assert main(["simulate-families", "--n", "10", "--reps", "40", "--h-grid", "0.5,1", "--workers", "1",
                 "--out", str(tmp_path / "f")]) == 0
    assert (tmp_path / "f" / "trajectory.csv").exists()
    assert main(["simulate-sde", "--families", "4", "--reps", "200", "--t", "2", "--h-grid", "0.5",
                 "--dt", "0.005", "--workers", "1", "--out", str(tmp_path / "s")]) == 0
    assert _summary(tmp_path / "s")["gates"]["simplex_preserved"]


def test_compare_and_figures(tmp_path):
    assert main(["compare", "--n", "12", "--reps", "60", "--h-grid", "0.5", "--families", "4",
                 "--dt", "0.01", "--workers", "1", "--out", str(tmp_path / "c")]) == 0
    assert main(["reproduce-figures", "--n", "20", "--reps", "30", "--alpha", "0,5", "--t", "3",
                 "--h-grid", "0:3:13", "--workers", "1", "--out", str(tmp_path / "r")]) == 0
    for name in ("fig_cdf.svg", "fig_mean.svg", "cdf_by_alpha.csv", "mean_vs_alpha.csv"):
        assert (tmp_path / "r" / name).exists()


def test_console_script_runs():
    res = subprocess.run([sys.executable, "-m", "genea_sel.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and __version__ in res.stdout
