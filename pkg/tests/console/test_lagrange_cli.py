from __future__ import annotations

import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

from app.console.lagrange_cli import app

runner = CliRunner()

TWO_LEVEL = """\
hamiltonian: {type: eigenvalues, energies: [1.0, 2.0]}
initial_state: [1.0, 0.0]
t_span: [0.0, 1.0]
outputs: [schrodinger_trajectory, equivalence_report]
thresholds: {max_state_deviation: 1.0e-6}
"""

SIGMA_Y = """\
hamiltonian:
  type: inline_matrix
  entries: [[0, [0, -1]], [[0, 1], 0]]
"""

SIGMA_Y_WITH_THRESHOLD = SIGMA_Y + "thresholds: {max_state_deviation: 1.0e-6}\n"

KG = """\
hamiltonian: {type: klein_gordon, grid: {n_points: 32, length: 16.0}, mode_index: 2}
thresholds: {dispersion_rel: 1.0e-6}
"""


@pytest.fixture
def write_config(tmp_path):
    def _write(text: str, name: str = "run.yaml") -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write


def test_run_writes_outputs(tmp_path, write_config):
    cfg = write_config(TWO_LEVEL)
    out = tmp_path / "out"
    result = runner.invoke(app, ["run", "--config", str(cfg), "--out", str(out)])

    assert result.exit_code == 0, result.output
    report = json.loads((out / "equivalence_report.json").read_text(encoding="utf-8"))
    assert report["max_state_deviation"] <= 1e-6
    assert (out / "schrodinger_trajectory.csv").exists()
    assert not (out / "lagrangian_trajectory.csv").exists()


def test_run_threshold_failure_exits_1(tmp_path, write_config):
    cfg = write_config(SIGMA_Y_WITH_THRESHOLD)
    result = runner.invoke(app, ["run", "--config", str(cfg), "--out", str(tmp_path / "out")])
    assert result.exit_code == 1


def test_run_singular_without_thresholds_exits_0(tmp_path, write_config):
    cfg = write_config(SIGMA_Y)
    result = runner.invoke(app, ["run", "--config", str(cfg), "--out", str(tmp_path / "out")])
    assert result.exit_code == 0
    report = json.loads((tmp_path / "out" / "equivalence_report.json").read_text(encoding="utf-8"))
    assert report["singularity"]["invertible"] is False
    assert report["max_state_deviation"] is None


def test_bad_config_exits_2(tmp_path, write_config):
    cfg = write_config("hamiltonian:\n  type: eigenvalues\n  energies: []\n")
    result = runner.invoke(app, ["run", "--config", str(cfg), "--out", str(tmp_path / "out")])
    assert result.exit_code == 2
    assert "energies" in result.output


def test_check_singularity(write_config):
    singular = write_config(SIGMA_Y)
    result = runner.invoke(app, ["check-singularity", "--config", str(singular)])
    assert result.exit_code == 1
    assert json.loads(result.stdout)["invertible"] is False

    rotated = write_config(SIGMA_Y + "regularize: true\n", name="rotated.yaml")
    result = runner.invoke(app, ["check-singularity", "--config", str(rotated)])
    assert result.exit_code == 0
    assert json.loads(result.stdout)["invertible"] is True


def test_check_singularity_tol_flag(write_config):
    # min/max eigenvalue ratio 1e-6: singular only at a looser tolerance
    cfg = write_config("hamiltonian: {type: eigenvalues, energies: [1.0e-6, 1.0]}\n")
    assert runner.invoke(app, ["check-singularity", "--config", str(cfg)]).exit_code == 0
    assert runner.invoke(app, ["check-singularity", "--config", str(cfg), "--tol", "1e-3"]).exit_code == 1


def test_spectrum(tmp_path, write_config):
    cfg = write_config("hamiltonian: {type: eigenvalues, energies: [1.0, 2.0]}\n")
    result = runner.invoke(app, ["spectrum", "--config", str(cfg), "--out", str(tmp_path / "spec")])
    assert result.exit_code == 0
    report = json.loads(result.stdout)
    assert report["mismatch"] <= 1e-10
    assert len(report["phase_generator"]) == 4
    assert (tmp_path / "spec" / "spectrum_report.json").exists()


def test_kg_dispersion(write_config):
    cfg = write_config(KG)
    result = runner.invoke(app, ["kg-dispersion", "--config", str(cfg)])
    assert result.exit_code == 0
    report = json.loads(result.stdout)
    assert report["mode_index"] == 2
    assert report["relative_error_omega_sq"] <= 1e-6

    result = runner.invoke(app, ["kg-dispersion", "--config", str(cfg), "--mode", "3"])
    assert json.loads(result.stdout)["mode_index"] == 3


def test_kg_dispersion_needs_kg_source(write_config):
    cfg = write_config(SIGMA_Y)
    assert runner.invoke(app, ["kg-dispersion", "--config", str(cfg)]).exit_code == 2


def test_batch_isolates_outputs(tmp_path, write_config):
    a = write_config(TWO_LEVEL, name="a.yaml")
    b = write_config(SIGMA_Y_WITH_THRESHOLD, name="b.yaml")
    out = tmp_path / "batch"

    result = runner.invoke(app, ["batch", str(a), str(b), "--out", str(out), "--workers", "2"])
    assert result.exit_code == 1
    codes = json.loads(result.stdout)
    assert codes == {str(a): 0, str(b): 1}
    assert (out / "a" / "equivalence_report.json").exists()
    assert (out / "b" / "equivalence_report.json").exists()


def test_matrix_path_resolves_next_to_config():
    shipped = Path(__file__).resolve().parents[2] / "configs" / "sigma_y_regularized.yaml"
    result = runner.invoke(app, ["check-singularity", "--config", str(shipped)])
    assert result.exit_code == 0, result.output
    assert json.loads(result.stdout)["invertible"] is True
