import json

import numpy as np
import pytest

from kerrqed.cli import main, parse_grid, parse_log_grid, parse_ratios


def read(path):
    return path.read_bytes()


def test_grid_parsing():
    assert np.allclose(parse_grid("0:3.5:8"), np.linspace(0, 3.5, 8))
    assert parse_grid("0.5:0.5:1").tolist() == [0.5]
    assert np.allclose(parse_log_grid("1e-3:1e2:6"), np.geomspace(1e-3, 1e2, 6))
    assert parse_ratios("1,10,100") == [1.0, 10.0, 100.0]


def test_grid_parsing_rejects_malformed():
    from kerrqed.cli import _UsageError
    for bad in ("1:2", "a:b:c", "1:2:0"):
        with pytest.raises(_UsageError):
            parse_grid(bad)
    with pytest.raises(_UsageError):
        parse_log_grid("-1:2:5")
    with pytest.raises(_UsageError):
        parse_ratios("0,-3")


def test_staircase_single_row(tmp_path):
    rc = main(["staircase", "--ratios", "100", "--nc", "0.5:0.5:1",
               "--out", str(tmp_path), "--workers", "1"])
    assert rc == 0
    lines = (tmp_path / "staircase.csv").read_text().splitlines()
    assert lines[0] == "n_c,mean_n_ratio_100"
    assert len(lines) == 2
    value = float(lines[1].split(",")[1])
    assert abs(value - 0.5) < 3e-3


def test_window_command_values(tmp_path):
    rc = main(["window", "--g", "200", "--delta", "1000", "--kappa", "0.1",
               "--out", str(tmp_path)])
    assert rc == 0
    header, row = (tmp_path / "window.csv").read_text().splitlines()
    assert header == "delta_minus_mhz,delta_plus_mhz,method"
    lo, hi, method = row.split(",")
    assert method == "sweep"
    assert float(lo) == pytest.approx(0.0091, rel=0.10)
    assert float(hi) == pytest.approx(36.95, rel=0.10)


def test_determinism_byte_identical(tmp_path):
    args = ["g2scan", "--g", "100", "--delta", "1000", "--kappa", "0.1",
            "--omega", "0.01", "--delta-d", "9.8:10.0:5", "--workers", "2"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert read(a / "g2scan.csv") == read(b / "g2scan.csv")


def test_rerun_reproduces_csv(tmp_path):
    first = tmp_path / "first"
    assert main(["staircase", "--ratios", "1,10", "--nc", "0:1:15",
                 "--out", str(first)]) == 0
    original = read(first / "staircase.csv")
    second = tmp_path / "second"
    assert main(["rerun", str(first / "staircase.manifest.json"),
                 "--out", str(second)]) == 0
    assert read(second / "staircase.csv") == original


def test_manifest_contents(tmp_path):
    assert main(["response", "--g", "100", "--delta", "1000", "--kappa", "0.1",
                 "--omega", "0.1", "--delta-d", "9.96", "--out", str(tmp_path)]) == 0
    manifest = json.loads((tmp_path / "response.manifest.json").read_text())
    assert manifest["schema_version"] == 1
    assert manifest["subcommand"] == "response"
    assert manifest["outputs"] == ["response.csv"]
    assert manifest["extras"]["lineshape"] == "lorentzian"
    assert "duration_s" in manifest and "tool_version" in manifest
    assert manifest["options"]["delta_d_scalar"] == 9.96


def test_response_lineshape_tags(tmp_path):
    for dd, tag in (("9.74", "window"), ("9.96", "lorentzian")):
        out = tmp_path / dd
        assert main(["response", "--g", "100", "--delta", "1000", "--kappa", "0.1",
                     "--omega", "0.1", "--delta-d", dd, "--out", str(out)]) == 0
        manifest = json.loads((out / "response.manifest.json").read_text())
        assert manifest["extras"]["lineshape"] == tag


def test_g2scan_crossing_near_9p85(tmp_path):
    assert main(["g2scan", "--g", "100", "--delta", "1000", "--kappa", "0.1",
                 "--omega", "0.01", "--delta-d", "9.75:9.95:21",
                 "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "g2scan.csv").read_text().splitlines()[1:]
    dd = np.array([float(r.split(",")[0]) for r in rows])
    g2 = np.array([float(r.split(",")[2]) for r in rows])
    flips = np.nonzero(np.diff(np.sign(g2 - 1.0)))[0]
    assert len(flips) == 1
    assert abs(dd[flips[0]] - 9.85) < 0.1


def test_usage_error_exit_code(tmp_path, capsys):
    rc = main(["g2scan", "--g", "100", "--delta", "1000", "--kappa", "0.1",
               "--omega", "0.01", "--out", str(tmp_path)])  # no scan grid given
    assert rc == 2
    err = capsys.readouterr().err
    assert err.startswith("error:") and err.count("\n") == 1


def test_numerical_failure_exit_code(tmp_path, capsys):
    # bistable point without --branch: usage error, not a crash
    rc = main(["response", "--g", "200", "--delta", "1000", "--kappa", "0.1",
               "--omega", "0.15", "--delta-d", "36", "--out", str(tmp_path)])
    assert rc == 2
    # no stable root anywhere: numerical failure path
    rc = main(["g2", "--g", "200", "--delta", "1000", "--kappa", "0.1",
               "--omega", "0.0", "--delta-d", "36", "--tau", "0:1:3",
               "--out", str(tmp_path)])
    assert rc == 3
    assert "numerical failure" in capsys.readouterr().err


def test_figure_preset_bundle(tmp_path):
    assert main(["figure", "fig4a", "--out", str(tmp_path)]) == 0
    names = {p.name for p in tmp_path.iterdir()}
    assert names == {"fig4a__dd9.74.csv", "fig4a__dd9.96.csv", "fig4a.manifest.json"}
    manifest = json.loads((tmp_path / "fig4a.manifest.json").read_text())
    assert manifest["extras"]["lineshapes"] == {"9.74": "window", "9.96": "lorentzian"}
    header = (tmp_path / "fig4a__dd9.74.csv").read_text().splitlines()[0]
    assert header == "omega_prime_mhz,a_r,a_i,abs_s_out,re_fwm,im_fwm"


def test_figure_fig2b_bundle(tmp_path):
    assert main(["figure", "fig2b", "--out", str(tmp_path), "--workers", "2"]) == 0
    for dd in ("36", "37", "38"):
        assert (tmp_path / f"fig2b__dd{dd}.csv").exists()
    manifest = json.loads((tmp_path / "fig2b.manifest.json").read_text())
    assert manifest["extras"]["n_up"] == pytest.approx(16.0, rel=1e-9)
    # hysteresis at 36 MHz, none at 38 MHz
    def split_rows(name):
        rows = (tmp_path / name).read_text().splitlines()[1:]
        return np.array([[float(x) if x else np.nan for x in r.split(",")] for r in rows])
    r36 = split_rows("fig2b__dd36.csv")
    r38 = split_rows("fig2b__dd38.csv")
    assert np.nanmax(np.abs(r36[:, 11] - r36[:, 12])) > 0.1   # up vs down sweep
    assert np.nanmax(np.abs(r38[:, 11] - r38[:, 12])) < 1e-9
