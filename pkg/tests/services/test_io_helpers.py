from __future__ import annotations

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.models.errors import ConfigError
from app.models.integrators import Trajectory, integrate
from app.models.schemas import EquivalenceReport
from app.services.io_helpers.input_reader import InputFileReader, MatrixFormatError
from app.services.io_helpers.output_writer import OutputError, RunOutputWriter, trajectory_header

SIGMA_Y_FILE = """\
# Pauli y in the z basis
dim 2
hbar 0.5
0,0   0,-1
0,1   0,0
"""


# ---------------- Matrix files ----------------
def test_parse_matrix_file():
    mf = InputFileReader().parse_matrix(SIGMA_Y_FILE)
    assert mf.hbar == 0.5
    assert_allclose(mf.entries, [[0, -1j], [1j, 0]])


def test_parse_matrix_accepts_real_entries_and_separators():
    mf = InputFileReader().parse_matrix("dim: 2\n1; 2\n2 3  # trailing comment\n")
    assert mf.hbar is None
    assert_allclose(mf.entries, [[1, 2], [2, 3]])


@pytest.mark.parametrize(
    "text, line",
    [
        ("dim 2\n0,0 0,1\n0,1\n", 3),
        ("dim 2\n0,0 x,1\n0,1 0,0\n", 2),
        ("0,0\n", 1),
        ("dim zero\n", 1),
        ("dim 2\nhbar -1\n", 2),
        ("dim 2\n1,2,3 0\n0 0\n", 2),
    ],
)
def test_parse_matrix_errors_cite_line(text, line):
    with pytest.raises(MatrixFormatError) as exc:
        InputFileReader().parse_matrix(text)
    assert exc.value.line == line
    assert str(exc.value).startswith(f"line {line}:")


def test_parse_matrix_missing_rows():
    with pytest.raises(MatrixFormatError, match="expected 2 rows"):
        InputFileReader().parse_matrix("dim 2\n0 0\n")


def test_matrix_format_error_is_config_error():
    assert issubclass(MatrixFormatError, ConfigError)


def test_read_matrix_relative_to_base_dir(tmp_path):
    (tmp_path / "sy.mat").write_text(SIGMA_Y_FILE, encoding="utf-8")
    mf = InputFileReader(tmp_path).read_matrix("sy.mat")
    assert mf.entries.shape == (2, 2)

    with pytest.raises(MatrixFormatError):
        InputFileReader(tmp_path).read_matrix("missing.mat")


def test_read_potential_table(tmp_path):
    path = tmp_path / "v.txt"
    path.write_text("# x V\n-1, 1.0\n0 0.0\n1\t1.0\n", encoding="utf-8")
    xs, vs = InputFileReader().read_potential_table(path)
    assert_allclose(xs, [-1, 0, 1])
    assert_allclose(vs, [1, 0, 1])


def test_read_potential_table_bad_row(tmp_path):
    path = tmp_path / "v.txt"
    path.write_text("0 0\n1 2 3\n", encoding="utf-8")
    with pytest.raises(MatrixFormatError) as exc:
        InputFileReader().read_potential_table(path)
    assert exc.value.line == 2


# ---------------- Output ----------------
def test_trajectory_header():
    assert trajectory_header(2, "phase") == ["t", "q_1", "q_2", "p_1", "p_2"]
    assert trajectory_header(1, "lagrangian") == ["t", "q_1", "qdot_1"]


def test_emit_single_step_trajectory(tmp_path):
    A = np.array([[0.0, 1.0], [-1.0, 0.0]])
    traj = integrate(A, np.array([1.0, 0.0]), 0.0, 0.1, 0.1)
    path = RunOutputWriter(tmp_path / "out").emit_trajectory(traj, "traj.csv", kind="phase")

    text = path.read_text(encoding="utf-8")
    lines = text.split("\n")
    assert lines[0] == "t,q_1,p_1"
    assert len([ln for ln in lines[1:] if ln]) == 2
    assert "\r" not in text

    row = lines[2].split(",")
    assert float(row[0]) == 0.1
    # 17 significant digits reproduce the float exactly
    assert float(row[1]) == traj.final[0]


def test_emit_empty_trajectory_writes_header_only(tmp_path):
    traj = Trajectory(times=np.array([]), states=np.zeros((0, 4)))
    path = RunOutputWriter(tmp_path).emit_trajectory(traj, "empty.csv", kind="lagrangian")
    assert path.read_text(encoding="utf-8") == "t,q_1,q_2,qdot_1,qdot_2\n"


def test_emit_two_level_has_five_columns(tmp_path):
    A = np.zeros((4, 4))
    traj = integrate(A, np.ones(4), 0.0, 1.0, 0.5)
    path = RunOutputWriter(tmp_path).emit_trajectory(traj, "t.csv")
    for line in path.read_text(encoding="utf-8").splitlines():
        assert len(line.split(",")) == 5


def test_emit_is_deterministic(tmp_path):
    A = np.array([[0.0, 2.0], [-2.0, 0.0]])
    traj = integrate(A, np.array([0.3, 0.1]), 0.0, 1.0, 0.01, record_every=7)
    writer = RunOutputWriter(tmp_path)
    a = writer.emit_trajectory(traj, "a.csv").read_bytes()
    b = writer.emit_trajectory(traj, "b.csv").read_bytes()
    assert a == b


def test_write_report_fixed_keys(tmp_path):
    report = EquivalenceReport(max_state_deviation=1e-9, norm_drift=0.0, energy_drift=0.0, spectrum_mismatch=0.0)
    path = RunOutputWriter(tmp_path).write_report(report, "r.json")
    assert EquivalenceReport.model_validate_json(path.read_text(encoding="utf-8")) == report
    for key in ("max_state_deviation", "norm_drift", "energy_drift", "spectrum_mismatch", "singularity"):
        assert f'"{key}"' in path.read_text(encoding="utf-8")


def test_output_error_when_directory_is_a_file(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("x", encoding="utf-8")
    with pytest.raises(OutputError):
        RunOutputWriter(blocker).write_report(EquivalenceReport(), "r.json")
