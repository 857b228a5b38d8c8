"""The ``unideform`` command: exit codes, reports and CSV output."""

import csv
import json

import pytest

from unideform.cli import main, write_csv

FAST_TWO_LEVEL = 'kind = "twolevel-cubic"\n[numerics]\ndt = 1e-3\nsample_every = 200\n'
DEFAULT_TWO_LEVEL = 'kind = "twolevel-cubic"\n[numerics]\nsample_every = 400\n'


def run(tmp_path, text, *extra, name="cfg.toml"):
    cfg = tmp_path / name
    cfg.write_text(text)
    out = tmp_path / "out"
    return main(["run", str(cfg), "--out", str(out), *extra]), out


def test_list_scenarios(capsys):
    assert main(["list-scenarios"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert any(line.startswith("twolevel-cubic") for line in lines)
    assert len(lines) == 7


def test_validate_prints_defaults(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text('kind = "nlevel"\n')
    assert main(["validate", str(cfg)]) == 0
    echo = json.loads(capsys.readouterr().out)
    assert echo["numerics"]["dt"] == 5e-3 and echo["seed"] == 0


def test_unknown_kind_exits_with_config_error(tmp_path, capsys):
    code, _ = run(tmp_path, 'kind = "warp-drive"\n')
    assert code == 2
    body = json.loads(capsys.readouterr().out)
    assert body["error"] == "config"
    assert body["violations"][0]["field"] == "kind"


def test_syntax_error_reports_line(tmp_path, capsys):
    code, _ = run(tmp_path, 'kind = "nlevel"\nc = = 2\n')
    assert code == 2
    assert json.loads(capsys.readouterr().out)["line"] == 2


def test_missing_file(tmp_path, capsys):
    assert main(["run", str(tmp_path / "nope.toml")]) == 2


def test_two_level_run_passes_and_writes_schema(tmp_path, capsys):
    code, out = run(tmp_path, DEFAULT_TWO_LEVEL)
    assert code == 0
    report = json.loads((out / "twolevel-cubic_report.json").read_text())
    assert report["status"] == "pass"
    series = out / "twolevel-cubic_series.csv"
    raw = series.read_bytes()
    assert b"\r\n" not in raw
    rows = list(csv.reader(series.open()))
    assert rows[0] == ["t", "theta", "phi", "v", "h_y", "nx", "ny", "nz", "nx_tilde", "ny_tilde", "nz_tilde"]
    assert len(rows) == 1 + 12000 // 400 + 1
    # v(1) from the closed form
    row = next(r for r in rows[1:] if float(r[0]) == pytest.approx(1.0))
    assert float(row[3]) == pytest.approx(0.4, abs=1e-9)
    fid = list(csv.DictReader((out / "twolevel-cubic_fidelity.csv").open()))
    assert all(0.0 <= float(r["fidelity_cd"]) <= 1.0 for r in fid)


def test_coarse_step_fails_only_the_invariant_bound(tmp_path, capsys):
    """At dt = 1e-3 the central-difference residual of the deformed trajectory
    is about 1.35e-5, just above its 1e-5 bound; every other metric passes."""
    code, out = run(tmp_path, FAST_TWO_LEVEL)
    assert code == 1
    metrics = json.loads((out / "twolevel-cubic_report.json").read_text())["metrics"]
    assert [k for k, m in metrics.items() if not m["pass"]] == ["invariant_residual_max"]


def test_runs_are_bit_identical(tmp_path, capsys):
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    code1, out1 = run(tmp_path / "a", FAST_TWO_LEVEL)
    code2, out2 = run(tmp_path / "b", FAST_TWO_LEVEL)
    assert code1 == code2
    for name in ("twolevel-cubic_series.csv", "twolevel-cubic_fidelity.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_override_changes_the_run(tmp_path, capsys):
    run(tmp_path, FAST_TWO_LEVEL, "--override", "c=2")
    out = tmp_path / "out"
    assert json.loads((out / "twolevel-cubic_report.json").read_text())["scenario"]["c"] == 2
    # hz = 2 t^3: sin(phi(1)) = 6/8 and d/dt sin(phi) = (96 - 144)/64 at t = 1
    s, sd = 0.75, -0.75
    c = (1 - s * s) ** 0.5
    v = sd / c - 2.0 * (1 - c)
    row = next(r for r in csv.DictReader((out / "twolevel-cubic_series.csv").open()) if float(r["t"]) == pytest.approx(1.0))
    assert float(row["v"]) == pytest.approx(v, abs=1e-9)


def test_infeasible_speed_is_a_numerical_error(tmp_path, capsys):
    code, out = run(tmp_path, FAST_TWO_LEVEL, "--override", "c=10")
    assert code == 3
    report = json.loads((out / "twolevel-cubic_report.json").read_text())
    assert report["error"]["type"] == "InfeasibleSpeedError"


def test_transport_without_displacement_driver_changes_nothing(tmp_path, capsys):
    text = 'kind = "transport-1d"\ndisplacement = 0.0\n[numerics]\nt_end = 0.5\n'
    code, out = run(tmp_path, text)
    assert code == 0
    rows = list(csv.DictReader((out / "transport-1d_series.csv").open()))
    assert all(r["fidelity_deformed"] == r["fidelity_bare"] for r in rows)


def test_hydrogen_closed_form_fails_its_residual_scaling_form_passes(tmp_path, capsys):
    code, out = run(tmp_path, 'kind = "hydrogen-check"\n')
    assert code == 1
    report = json.loads((out / "hydrogen-check_report.json").read_text())
    assert report["status"] == "tolerance-failed"
    code, _ = run(tmp_path, 'kind = "hydrogen-check"\nhydrogen_form = "scaling"\n')
    assert code == 0


def test_write_csv_rejects_ragged_columns(tmp_path):
    with pytest.raises(ValueError):
        write_csv(tmp_path / "x.csv", {"a": [1, 2], "b": [1]})
    path = write_csv(tmp_path / "y.csv", {"n": [1, 2], "x": [0.1, 1 / 3]})
    assert path.read_text() == "n,x\n1,0.10000000000000001\n2,0.33333333333333331\n"
