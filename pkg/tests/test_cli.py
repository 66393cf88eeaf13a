import json

import numpy as np
import pytest
from click.testing import CliRunner

from data_models import SampledField
from main import cli


@pytest.fixture
def runner():
    return CliRunner()


def _sampled_file(tmp_path, grid_agent, algebra="B3", family="s", M=10, length=None, seed=0):
    n = grid_agent.grid_barycentric(algebra, family, M).shape[0] if length is None else length
    rng = np.random.default_rng(seed)
    field = SampledField.from_values(algebra, family, M, rng.standard_normal(n) + 1j * rng.standard_normal(n))
    path = tmp_path / f"sampled_{algebra}_{family}_{M}_{n}.json"
    path.write_text(field.model_dump_json(), encoding="utf-8")
    return path, field


def test_grid_csv(runner, tmp_path):
    output = tmp_path / "grid.csv"
    result = runner.invoke(cli, ["grid", "--algebra", "B3", "--family", "s", "--M", "10", "--output", str(output)])
    assert result.exit_code == 0, result.output
    assert "55 grid points" in result.output
    lines = output.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "u0,u1,u2,u3,x1,x2,x3"
    assert len(lines) == 56


def test_weights_json(runner, tmp_path):
    output = tmp_path / "weights.json"
    result = runner.invoke(cli, ["weights", "--algebra", "C3", "--family", "l", "--M", "10", "-o", str(output)])
    assert result.exit_code == 0, result.output
    document = json.loads(output.read_text(encoding="utf-8"))
    assert document["kind"] == "weights"
    assert document["count"] == 55
    assert len(document["rows"]) == 55


@pytest.mark.parametrize("arguments", [
    ["grid", "--algebra", "B3", "--family", "s", "--M", "0"],
    ["grid", "--algebra", "D4", "--family", "s", "--M", "4"],
    ["grid", "--algebra", "B3", "--family", "x", "--M", "4"],
    ["verify", "--suite", "nonsense"],
    ["experiment", "--M", "4"],
])
def test_usage_errors(runner, arguments):
    assert runner.invoke(cli, arguments).exit_code == 2


def test_forward_and_inverse_transform(runner, tmp_path, grid_agent):
    source, field = _sampled_file(tmp_path, grid_agent)
    spectral_path = tmp_path / "spectral.json"
    result = runner.invoke(cli, ["transform", "--input", str(source), "--output", str(spectral_path),
                                 "--verify-roundtrip"])
    assert result.exit_code == 0, result.output
    assert "Round-trip residual" in result.output
    spectral = json.loads(spectral_path.read_text(encoding="utf-8"))
    assert spectral["kind"] == "spectral"
    assert len(spectral["data"]) == 55

    back_path = tmp_path / "back.csv"
    result = runner.invoke(cli, ["transform", "--input", str(spectral_path), "--inverse", "--output", str(back_path)])
    assert result.exit_code == 0, result.output
    rows = np.loadtxt(back_path, delimiter=",", skiprows=1)
    np.testing.assert_allclose(rows[:, 0] + 1j * rows[:, 1], field.to_array(), atol=1e-9)


def test_transform_of_csv_input(runner, tmp_path):
    source = tmp_path / "values.csv"
    source.write_text("re,im\n1,0\n0.5,0.25\n-1,2\n0,0\n3,1\n", encoding="utf-8")
    output = tmp_path / "out.json"
    result = runner.invoke(cli, ["transform", "--input", str(source), "--output", str(output),
                                 "--algebra", "B3", "--family", "s", "--M", "4"])
    assert result.exit_code == 0, result.output
    assert len(json.loads(output.read_text(encoding="utf-8"))["data"]) == 5


def test_malformed_input_is_a_data_error(runner, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    assert runner.invoke(cli, ["transform", "--input", str(bad)]).exit_code == 3

    text = tmp_path / "bad.csv"
    text.write_text("re,im\n1,abc\n", encoding="utf-8")
    result = runner.invoke(cli, ["transform", "--input", str(text), "--algebra", "B3", "--family", "s", "--M", "4"])
    assert result.exit_code == 3

    assert runner.invoke(cli, ["transform", "--input", str(text)]).exit_code == 3


def test_length_mismatch_is_a_data_error(runner, tmp_path, grid_agent):
    source, _ = _sampled_file(tmp_path, grid_agent, length=54)
    result = runner.invoke(cli, ["transform", "--input", str(source)])
    assert result.exit_code == 3
    assert "55" in result.output


def test_empty_grid_is_not_an_error(runner, tmp_path):
    source = tmp_path / "empty.csv"
    source.write_text("re,im\n", encoding="utf-8")
    output = tmp_path / "empty.json"
    result = runner.invoke(cli, ["transform", "--input", str(source), "--output", str(output),
                                 "--algebra", "C3", "--family", "s", "--M", "2"])
    assert result.exit_code == 0, result.output
    assert json.loads(output.read_text(encoding="utf-8"))["data"] == []


def test_interpolate(runner, tmp_path, grid_agent):
    source, _ = _sampled_file(tmp_path, grid_agent, "C3", "l", 6)
    spectral_path = tmp_path / "spectral.json"
    assert runner.invoke(cli, ["transform", "--input", str(source), "-o", str(spectral_path)]).exit_code == 0

    points = tmp_path / "points.csv"
    points.write_text("x1,x2,x3\n0.1,0.05,0.02\n0.2,0.1,0.05\n", encoding="utf-8")
    output = tmp_path / "values.csv"
    result = runner.invoke(cli, ["interpolate", "--spectral", str(spectral_path), "--points", str(points),
                                 "--output", str(output)])
    assert result.exit_code == 0, result.output
    lines = output.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "x1,x2,x3,re,im"
    assert len(lines) == 3


def test_verify_passes(runner, tmp_path):
    report = tmp_path / "report.md"
    result = runner.invoke(cli, ["verify", "--suite", "counting", "--suite", "closure", "--max-M", "4",
                                 "--report", str(report)])
    assert result.exit_code == 0, result.output
    assert "All suites passed" in result.output
    assert report.read_text(encoding="utf-8").startswith("# Orbit Transform Workflow Report")


def test_verify_detects_corrupted_epsilon(runner):
    result = runner.invoke(cli, ["verify", "--suite", "gram", "--max-M", "4", "--corrupt-epsilon"])
    assert result.exit_code == 1
    assert "❌" in result.output


def test_custom_experiment_outside_F(runner, tmp_path):
    outputs = [tmp_path / "first.json", tmp_path / "second.json"]
    for output in outputs:
        result = runner.invoke(cli, ["experiment", "--algebra", "B3", "--family", "s", "--center", "5", "5", "5",
                                     "--M", "4", "--mc-samples", "500", "--output", str(output)])
        assert result.exit_code == 0, result.output
    document = json.loads(outputs[0].read_text(encoding="utf-8"))
    experiment = document["experiments"][0]
    assert experiment["error_l2"] == 0.0
    assert experiment["error_method"] == "monte_carlo"
    assert document["reference"] is None
    assert outputs[0].read_bytes() == outputs[1].read_bytes()


def test_experiment_with_slices(runner, tmp_path):
    slices = tmp_path / "slices"
    result = runner.invoke(cli, ["experiment", "--preset", "f2", "--M", "4", "--slices-dir", str(slices),
                                 "--resolution", "6"])
    assert result.exit_code == 0, result.output
    assert "reference" not in result.output
    assert (slices / "model_axis2.csv").exists()
    assert len((slices / "interpolant_M4_axis2.csv").read_text(encoding="utf-8").splitlines()) == 7


def test_bad_bump_radii(runner):
    result = runner.invoke(cli, ["experiment", "--algebra", "B3", "--family", "l", "--center", "0.5", "0.3", "0.1",
                                 "--alpha", "0.2", "--beta", "0.1", "--M", "4"])
    assert result.exit_code == 2


def test_slice_of_the_model(runner, tmp_path):
    output = tmp_path / "slice.csv"
    result = runner.invoke(cli, ["slice", "--algebra", "B3", "--center", "0.5", "0.333", "0.125",
                                 "--value", "0.125", "--resolution", "8", "--output", str(output)])
    assert result.exit_code == 0, result.output
    lines = output.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 9
    assert lines[0].startswith(",")


def test_slice_needs_a_source(runner, tmp_path):
    result = runner.invoke(cli, ["slice", "--value", "0.1", "--output", str(tmp_path / "s.csv")])
    assert result.exit_code == 2


def test_config_supplies_defaults(runner, tmp_path):
    config = tmp_path / "run.yaml"
    config.write_text("algebra: C3\nfamily: l\nM: 10\nthreads: 2\n", encoding="utf-8")
    output = tmp_path / "grid.json"
    result = runner.invoke(cli, ["--config", str(config), "grid", "--output", str(output)])
    assert result.exit_code == 0, result.output
    assert json.loads(output.read_text(encoding="utf-8"))["count"] == 55


def test_invalid_config_is_a_data_error(runner, tmp_path):
    config = tmp_path / "run.yaml"
    config.write_text("- not\n- a mapping\n", encoding="utf-8")
    result = runner.invoke(cli, ["--config", str(config), "grid", "--algebra", "B3", "--family", "s", "--M", "4"])
    assert result.exit_code == 3


@pytest.mark.parametrize("flag, preset", [("--paper-f1", "f1"), ("--paper-f2", "f2")])
def test_preset_flag_aliases(runner, tmp_path, flag, preset):
    output = tmp_path / f"{preset}.json"
    result = runner.invoke(cli, ["experiment", flag, "--M", "4", "--output", str(output)])
    assert result.exit_code == 0, result.output
    document = json.loads(output.read_text(encoding="utf-8"))
    assert document["preset"] == preset
    assert document["reference"] == {}
    assert document["experiments"][0]["M"] == 4


def test_conflicting_presets_are_a_usage_error(runner):
    assert runner.invoke(cli, ["experiment", "--paper-f1", "--preset", "f2", "--M", "4"]).exit_code == 2
    assert runner.invoke(cli, ["experiment", "--paper-f1", "--paper-f2", "--M", "4"]).exit_code == 2


@pytest.mark.parametrize("extra", [[], ["--integration", "monte_carlo"]])
def test_verify_continuous_uses_monte_carlo_samples(runner, extra):
    result = runner.invoke(cli, ["verify", "--suite", "continuous", "--mc-samples", "20"] + extra)
    assert result.exit_code == 1
    assert "continuous" in result.output
