import json
import math
from pathlib import Path

import numpy as np
import pytest

from timelab.errors import ConfigurationError, NoArrivalError
from timelab.report import (dumps, expand_sweep, export_results, format_float, load_config,
                            load_schema, run_scenario, sweep, validate)
from timelab.report.cli import main

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"
THETA = {"kind": "theta_classical", "id": "theta", "params": {"x0": -2.0, "P_x0": 1.0}}
ENERGY_SWEEP = {
    "kind": "sweep", "id": "te",
    "base": {"kind": "total_energy_ideal",
             "params": {"H_box0": 0.5, "P_x": 1.0, "g": {"kind": "box", "x0": 1.0}, "z0": 0.0,
                        "x_range": [-1.0, 2.0]}},
    "axes": [{"name": "z0", "values": [0.2, 0.0, 0.1]}],
}


# ---------------------------------------------------------------- config

def test_schema_is_valid_draft_2020_12():
    import jsonschema
    jsonschema.Draft202012Validator.check_schema(load_schema())


@pytest.mark.parametrize("path", sorted(SCENARIOS.glob("*.json")), ids=lambda p: p.stem)
def test_checked_in_scenarios_validate(path):
    config = load_config(path)
    if config["kind"] == "sweep":
        assert expand_sweep(config)


@pytest.mark.parametrize("params, field", [
    ({"m": -1.0, "x0": -2.0, "P_x0": 1.0}, "m"),
    ({"x0": -2.0}, "P_x0"),
    ({"x0": "far", "P_x0": 1.0}, "x0"),
    ({"x0": -2.0, "P_x0": 1.0, "colour": 1}, "colour"),
])
def test_validation_names_the_offending_field(params, field):
    with pytest.raises(ConfigurationError) as exc:
        validate({"kind": "theta_classical", "params": params})
    assert exc.value.field == field


def test_structural_errors():
    for bad in ({"kind": "nope", "params": {}}, {"params": {}}, [], {"kind": "sweep", "params": {}}):
        with pytest.raises(ConfigurationError):
            validate(bad)
    with pytest.raises(ConfigurationError):
        load_config("{not json")
    with pytest.raises(ConfigurationError) as exc:
        load_config("/nonexistent/scenario.json")
    assert exc.value.field == "path"


def test_sweep_expansion():
    members = expand_sweep(ENERGY_SWEEP)
    assert [v["z0"] for v, _ in members] == [0.2, 0.0, 0.1]
    assert all(m["params"]["H_box0"] == 0.5 for _, m in members)
    nested = dict(ENERGY_SWEEP, axes=[{"name": "g.x0", "values": [1.0, 2.0]}])
    assert [m["params"]["g"]["x0"] for _, m in expand_sweep(nested)] == [1.0, 2.0]
    for axes in ([{"name": "colour", "values": [1]}],
                 [{"name": "z0", "values": [1]}, {"name": "z0", "values": [2]}],
                 [{"name": "P_x", "values": ["fast"]}]):
        with pytest.raises(ConfigurationError):
            expand_sweep(dict(ENERGY_SWEEP, axes=axes))


# ---------------------------------------------------------------- runner

def test_run_theta_classical():
    result = run_scenario(THETA)
    assert result.summary["record"] == pytest.approx(2.0, abs=1e-9)
    assert result.scenario_id == "theta"
    traj = result.arrays["trajectory"]
    assert traj.columns[0] == "param" and traj.columns[-1] == "energy"
    assert traj.data.shape[1] == len(traj.columns) == len(traj.units)
    assert [k for k, _ in result.events["trajectory"]] == ["crossing"]
    assert result.provenance["config_hash"] and result.provenance["warnings"] == []


def test_runtime_errors_carry_the_scenario_id():
    with pytest.raises(NoArrivalError, match="scenario theta"):
        run_scenario({"kind": "theta_classical", "id": "theta",
                      "params": {"x0": -2.0, "P_x0": 1.0, "P_y0": 5.0}})


@pytest.mark.parametrize("name", ["margins", "arnold_harmonic", "internal_time_bump",
                                  "kick_bimodal", "theta_classical_recoil"])
def test_quick_scenarios_run(name):
    result = run_scenario(load_config(SCENARIOS / f"{name}.json"))
    assert result.summary
    assert all(not isinstance(v, float) or math.isfinite(v) for v in result.summary.values())


def test_small_quantum_scenarios_run():
    arrival = run_scenario({"kind": "arrival_povm", "params": {
        "x0": -10.0, "p0": 2.0, "sigma": 1.0, "n_points": 1024, "x_range": [-100, 100],
        "T_range": [-30, 30], "n_T": 512}})
    assert arrival.summary["captured_mass"] == pytest.approx(1.0, abs=1e-3)
    clock = run_scenario({"kind": "theta_clock_quantum", "params": {
        "x0": -10.0, "p0": 3.0, "sigma": 1.5, "pointer_width": 0.5, "t_final": 6.0,
        "n_x": 256, "n_z": 64}})
    assert clock.summary["norm"] == pytest.approx(1.0, abs=1e-10)
    assert clock.summary["record_shift"] == pytest.approx(10 / 3, rel=0.1)


def test_sweep_is_sorted_and_tabulated():
    result = sweep(ENERGY_SWEEP)
    assert [r["z0"] for r in result.rows] == [0.0, 0.1, 0.2]
    assert result.table.columns[0] == "z0"
    errors = result.table.data[:, list(result.table.columns).index("relative_error")]
    assert np.all(np.diff(errors) > 0)
    with pytest.raises(ConfigurationError):
        run_scenario(ENERGY_SWEEP)


def test_sweep_with_workers_matches_serial():
    serial, parallel = sweep(ENERGY_SWEEP), sweep(ENERGY_SWEEP, workers=2)
    np.testing.assert_array_equal(serial.table.data, parallel.table.data)


# ---------------------------------------------------------------- export

def test_float_formatting_round_trips():
    for x in (0.1, 1 / 3, -2.5e-300, 1e308, 0.0):
        assert float(format_float(x)) == x
    assert format_float(math.nan) == "NaN"
    assert format_float(-math.inf) == "-Infinity"
    text = dumps({"a": [1.5, math.inf], "b": {"c": None, "d": True, "e": "q\"x"}})
    assert json.loads(text) == {"a": [1.5, "Infinity"], "b": {"c": None, "d": True, "e": 'q"x'}}


def test_json_export(tmp_path):
    (path,) = export_results(run_scenario(THETA), tmp_path, "json")
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    assert data["summary"]["record"] == pytest.approx(2.0)
    assert data["arrays"]["trajectory"]["columns"][0] == "param"
    assert b"\r\n" not in Path(path).read_bytes()


def test_csv_export(tmp_path):
    paths = [Path(p).name for p in export_results(run_scenario(THETA), tmp_path, "csv")]
    assert "theta_summary.csv" in paths and "theta_manifest.json" in paths
    assert "theta_trajectory.csv" in paths and "theta_trajectory_events.csv" in paths
    header = (tmp_path / "theta_trajectory.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header.startswith("param,x,P_x,y,P_y")
    sweep_paths = [Path(p).name for p in export_results(sweep(ENERGY_SWEEP), tmp_path, "csv")]
    assert "te_table.csv" in sweep_paths and "te_sweep.json" in sweep_paths
    with pytest.raises(ConfigurationError):
        export_results(run_scenario(THETA), tmp_path, "xml")


# ---------------------------------------------------------------- CLI

def test_cli_run_and_validate(tmp_path, capsys):
    scenario = SCENARIOS / "theta_classical.json"
    assert main(["validate", str(scenario)]) == 0
    assert main(["run", str(scenario), "--out", str(tmp_path), "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert "theta_classical\trecord\t2" in out
    assert (tmp_path / "theta_classical_summary.csv").exists()


def test_cli_sweep(tmp_path, capsys):
    assert main(["sweep", str(SCENARIOS / "total_energy_real.json"), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "total_energy_real_sweep.json").exists()
    assert main(["sweep", str(SCENARIOS / "theta_classical.json")]) == 2


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "theta_classical",
                               "params": {"m": -1, "x0": -2, "P_x0": 1}}), encoding="utf-8")
    assert main(["run", str(bad)]) == 2
    assert "field: m" in capsys.readouterr().err
    stuck = tmp_path / "stuck.json"
    stuck.write_text(json.dumps({"kind": "theta_classical",
                                 "params": {"x0": -2, "P_x0": 1, "P_y0": 5}}), encoding="utf-8")
    assert main(["run", str(stuck)]) == 1
    assert "NoArrivalError" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0


def test_invalid_example_is_rejected(capsys):
    with pytest.raises(ConfigurationError) as exc:
        load_config(SCENARIOS / "invalid" / "negative_mass.json")
    assert exc.value.field == "m"
    assert main(["validate", str(SCENARIOS / "invalid" / "negative_mass.json")]) == 2


def test_docs_schema_matches_packaged_schema():
    docs = SCENARIOS.parent / "docs" / "scenario.schema.json"
    assert json.loads(docs.read_text(encoding="utf-8")) == load_schema()
