import json
import math
import subprocess
import sys

import numpy as np
import pytest
import yaml

from skybell.cli import (
    EXIT_CONFIG,
    EXIT_IO,
    EXIT_NUMERICAL,
    EXIT_OK,
    SCAN_CSV_COLUMNS,
    read_scan_csv,
    run,
)
from skybell.config import default_config, dump_config


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(dump_config(default_config()), encoding="utf-8")
    return path


def write_variant(tmp_path, name, **updates):
    doc = yaml.safe_load(dump_config(default_config()))
    for key, value in updates.items():
        node = doc
        parts = key.split(".")
        for p in parts[:-1]:
            node = node[p]
        node[parts[-1]] = value
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc, sort_keys=False), encoding="utf-8")
    return path


# ---------------------------------------------------------------- chsh


def test_chsh_analytic_output(config_path, capsys):
    assert run(["chsh", "--config", str(config_path)]) == EXIT_OK
    out = capsys.readouterr().out.strip()
    assert out == "S = 1.096016 (analytic)"


def test_chsh_angle_override(config_path, capsys):
    code = run(["chsh", "--config", str(config_path), "--angles", "0:45:22.5:157.5"])
    assert code == EXIT_OK
    assert capsys.readouterr().out.strip() == "S = 1.096016 (analytic)"


def test_chsh_pure_signal(tmp_path, capsys):
    path = write_variant(tmp_path, "pure.yaml", entangled_fraction=1.0)
    assert run(["chsh", "--config", str(path)]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "S = 2.828427 (analytic)"


def test_chsh_monte_carlo_report(config_path, tmp_path, capsys):
    out_path = tmp_path / "chsh.json"
    code = run(
        ["chsh", "--config", str(config_path), "--n", "50000", "--seed", "4",
         "--out", str(out_path)]
    )
    assert code == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "S = 1.096016 (analytic)"
    assert lines[1].endswith("(monte carlo, n=50000 per setting)")

    report = json.loads(out_path.read_text())
    assert report["analytic_S"] == pytest.approx(1.0960155108391485)
    mc = report["monte_carlo"]
    assert mc["n_per_setting"] == 50000 and mc["seed"] == 4
    assert abs(mc["S_hat"] - report["analytic_S"]) < 5.0 * mc["stderr"]
    assert report["manifest"] == "chsh.json.manifest.json"

    manifest = json.loads((tmp_path / "chsh.json.manifest.json").read_text())
    assert manifest["command"] == "chsh"
    assert manifest["tool"] == "skybell"
    assert manifest["seed"] == 4
    assert str(out_path) in manifest["outputs"]
    assert manifest["created_utc"]


def test_chsh_missing_config_field(tmp_path, capsys):
    doc = yaml.safe_load(dump_config(default_config()))
    del doc["entangled_fraction"]
    path = tmp_path / "bad.yaml"
    path.write_text(yaml.safe_dump(doc), encoding="utf-8")
    assert run(["chsh", "--config", str(path)]) == EXIT_CONFIG
    assert "entangled_fraction" in capsys.readouterr().err


def test_chsh_missing_config_file(tmp_path, capsys):
    missing = tmp_path / "nope.yaml"
    assert run(["chsh", "--config", str(missing)]) == EXIT_IO


# ---------------------------------------------------------------- scan


def test_scan_csv_layout(config_path, tmp_path):
    out_path = tmp_path / "scan.csv"
    code = run(
        ["scan", "--config", str(config_path), "--grid-a", "0:168.75:16",
         "--grid-b", "0:168.75:16", "--out", str(out_path)]
    )
    assert code == EXIT_OK
    lines = out_path.read_text().splitlines()
    assert lines[0] == "# manifest: scan.csv.manifest.json"
    assert lines[1] == ",".join(SCAN_CSV_COLUMNS)
    assert len(lines) == 2 + 256
    assert (tmp_path / "scan.csv.manifest.json").exists()

    # full-precision round trip
    scan = read_scan_csv(out_path)
    assert len(scan) == 256
    assert scan.theta_a[0] == 0.0
    assert scan.theta_b[1] == pytest.approx(math.radians(11.25), abs=0.0)
    # analytic scan records no seed in the manifest
    manifest = json.loads((tmp_path / "scan.csv.manifest.json").read_text())
    assert manifest["seed"] is None


def test_scan_is_deterministic_byte_for_byte(config_path, tmp_path):
    args = ["scan", "--config", str(config_path), "--grid-a", "0:90:4",
            "--grid-b", "0:90:4", "--n", "5000"]
    p1 = tmp_path / "a.csv"
    p2 = tmp_path / "b.csv"
    assert run(args + ["--out", str(p1)]) == EXIT_OK
    assert run(args + ["--out", str(p2)]) == EXIT_OK
    body1 = p1.read_text().splitlines()[1:]  # drop the manifest comment
    body2 = p2.read_text().splitlines()[1:]
    assert body1 == body2


def test_scan_round_trips_exact_floats(config_path, tmp_path):
    out_path = tmp_path / "scan.csv"
    run(["scan", "--config", str(config_path), "--grid-a", "0:170:8",
         "--grid-b", "0:170:8", "--out", str(out_path)])
    scan = read_scan_csv(out_path)
    from skybell import angular_scan

    direct = angular_scan(
        default_config().experiment,
        np.deg2rad(np.linspace(0.0, 170.0, 8)),
        np.deg2rad(np.linspace(0.0, 170.0, 8)),
    )
    assert np.array_equal(scan.e, direct.e)
    assert np.array_equal(scan.theta_a, direct.theta_a)


def test_scan_rejects_bad_grid(config_path, tmp_path, capsys):
    code = run(["scan", "--config", str(config_path), "--grid-a", "0:90:0",
                "--grid-b", "0:90:4", "--out", str(tmp_path / "x.csv")])
    assert code == EXIT_CONFIG
    code = run(["scan", "--config", str(config_path), "--grid-a", "0:90",
                "--grid-b", "0:90:4", "--out", str(tmp_path / "x.csv")])
    assert code == EXIT_CONFIG


# ---------------------------------------------------------------- fit


def test_scan_then_fit_recovers_the_fraction(config_path, tmp_path, capsys):
    scan_path = tmp_path / "scan.csv"
    fit_path = tmp_path / "fit.json"
    run(["scan", "--config", str(config_path), "--grid-a", "0:168.75:16",
         "--grid-b", "0:168.75:16", "--out", str(scan_path)])
    code = run(["fit", str(scan_path), "--beta1", "0", "--beta2", "0",
                "--out", str(fit_path)])
    assert code == EXIT_OK
    report = json.loads(fit_path.read_text())
    assert report["S_hat"] == pytest.approx(0.3, abs=1e-10)
    assert report["B_hat"] == pytest.approx(0.175, abs=1e-10)
    assert report["residual_rms"] < 1e-10
    assert report["bell_S"] == pytest.approx(0.3 * 2.0 * math.sqrt(2.0), abs=1e-9)
    assert report["violates_bell"] is False
    assert report["manifest"] == "fit.json.manifest.json"
    out = capsys.readouterr().out
    assert "S_hat = 0.300000" in out


def test_fit_flags_a_bell_violation(tmp_path, capsys):
    path = write_variant(tmp_path, "hot.yaml", entangled_fraction=0.9)
    scan_path = tmp_path / "scan.csv"
    run(["scan", "--config", str(path), "--grid-a", "0:168.75:16",
         "--grid-b", "0:168.75:16", "--out", str(scan_path)])
    assert run(["fit", str(scan_path), "--beta1", "0", "--beta2", "0"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "bell inequality violated" in out


def test_fit_degenerate_small_separation_scan(tmp_path, capsys):
    # close sources, unpolarized: the scan's own background column is parallel
    # to the signal shape, so the self-calibrating fit must refuse
    path = write_variant(
        tmp_path,
        "close.yaml",
        scenario="I",
        **{
            "geometry.source1": [-0.5, 0.0, 1000.0],
            "geometry.source2": [0.5, 0.0, 1000.0],
            "background.alpha1": 0.0,
            "background.alpha2": 0.0,
        },
    )
    scan_path = tmp_path / "scan.csv"
    run(["scan", "--config", str(path), "--grid-a", "0:168.75:16",
         "--grid-b", "0:168.75:16", "--out", str(scan_path)])
    code = run(["fit", str(scan_path), "--beta1", "0", "--beta2", "0",
                "--background-basis", "scan"])
    assert code == EXIT_NUMERICAL
    err = capsys.readouterr().err
    assert "rank deficient" in err and "parallel" in err


def test_fit_rejects_foreign_csv(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,2\n", encoding="utf-8")
    assert run(["fit", str(bad), "--beta1", "0", "--beta2", "0"]) == EXIT_CONFIG

    missing = tmp_path / "missing.csv"
    assert run(["fit", str(missing), "--beta1", "0", "--beta2", "0"]) == EXIT_IO


# ---------------------------------------------------------------- hbt


def test_hbt_fringe_scan(config_path, tmp_path):
    out_path = tmp_path / "hbt.csv"
    code = run(["hbt", "--config", str(config_path), "--baseline", "0:100:101",
                "--out", str(out_path)])
    assert code == EXIT_OK
    lines = out_path.read_text().splitlines()
    assert lines[0] == "# manifest: hbt.csv.manifest.json"
    assert lines[1] == "baseline_length,total_intensity,interference_term"
    assert len(lines) == 2 + 101
    # at zero baseline both detectors coincide and the fringe peaks
    assert lines[2] == "0.0,4.0,2.0"

    rows = np.array([[float(v) for v in line.split(",")] for line in lines[2:]])
    # fringe period is about 100 for this geometry, so the interference term
    # crosses zero near the quarter and three-quarter marks and dips negative
    assert rows[:, 2].min() < -1.9
    signs = np.sign(rows[:, 2])
    assert np.any(signs[:60] < 0) and signs[0] > 0
    # total = direct(2) + interference everywhere
    assert np.allclose(rows[:, 1], 2.0 + rows[:, 2], atol=1e-9)


def test_hbt_random_phases_change_nothing(config_path, tmp_path):
    p1 = tmp_path / "fixed.csv"
    p2 = tmp_path / "random.csv"
    run(["hbt", "--config", str(config_path), "--baseline", "0:50:11", "--out", str(p1)])
    run(["hbt", "--config", str(config_path), "--baseline", "0:50:11",
         "--random-phases", "--seed", "123", "--out", str(p2)])
    rows1 = [line for line in p1.read_text().splitlines()[2:]]
    rows2 = [line for line in p2.read_text().splitlines()[2:]]
    for r1, r2 in zip(rows1, rows2):
        v1 = [float(x) for x in r1.split(",")]
        v2 = [float(x) for x in r2.split(",")]
        assert v1[0] == v2[0]
        assert abs(v1[1] - v2[1]) < 1e-9
        assert abs(v1[2] - v2[2]) < 1e-9


# ---------------------------------------------------------------- misc


def test_usage_errors_exit_two(capsys):
    assert run([]) == EXIT_CONFIG
    assert run(["chsh"]) == EXIT_CONFIG  # --config is required


def test_version_flag(capsys):
    assert run(["--version"]) == EXIT_OK
    assert "skybell" in capsys.readouterr().out


def test_module_entry_point(config_path):
    result = subprocess.run(
        [sys.executable, "-m", "skybell.cli", "chsh", "--config", str(config_path)],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0
    assert result.stdout.strip() == "S = 1.096016 (analytic)"
