from __future__ import annotations

from pathlib import Path

import pytest

from app.models.errors import ConfigError
from app.models.schemas import (
    BasisPreset,
    EigenvaluesSource,
    GaussianPreset,
    InlineMatrixSource,
    KleinGordonSource,
    RunConfig,
)
from app.services.config_loader import dump_config, load_config, load_config_text

TWO_LEVEL = """\
hamiltonian:
  type: eigenvalues
  energies: [1.0, 2.0]
hbar: 1.0
initial_state: [1.0, 0.0]
t_span: [0.0, 2.0]
dt: 0.001
outputs: [equivalence_report, spectrum_report]
thresholds:
  max_state_deviation: 1.0e-6
"""

SIGMA_Y = """\
hamiltonian:
  type: inline_matrix
  entries:
    - [0, [0, -1]]
    - [[0, 1], 0]
initial_state: {kind: basis, index: 1}
regularize: true
"""


def test_load_two_level():
    cfg = load_config_text(TWO_LEVEL)
    assert isinstance(cfg.hamiltonian, EigenvaluesSource)
    assert cfg.t_span == (0.0, 2.0)
    assert cfg.initial_state == [1.0, 0.0]
    assert cfg.thresholds.max_state_deviation == 1e-6
    assert cfg.outputs == ["equivalence_report", "spectrum_report"]


def test_load_inline_matrix_with_complex_entries():
    cfg = load_config_text(SIGMA_Y)
    assert isinstance(cfg.hamiltonian, InlineMatrixSource)
    assert cfg.hamiltonian.entries[0][1] == (0.0, -1.0)
    assert cfg.initial_state == BasisPreset(index=1)
    assert cfg.regularize is True


def test_defaults():
    cfg = load_config_text("hamiltonian: {type: klein_gordon}\ninitial_state: {kind: gaussian, width: 2.0}\n")
    assert isinstance(cfg.hamiltonian, KleinGordonSource)
    assert cfg.hamiltonian.grid.n_points == 128
    assert cfg.hamiltonian.mode_index == 4
    assert isinstance(cfg.initial_state, GaussianPreset)
    assert cfg.dt == 1e-3
    assert cfg.outputs == ["equivalence_report"]


def test_yaml_syntax_error_cites_line():
    text = "hamiltonian:\n  type: eigenvalues\n  energies: [1.0, 2.0\nhbar: 1.0\n"
    with pytest.raises(ConfigError) as exc:
        load_config_text(text)
    assert exc.value.line is not None
    assert exc.value.line >= 3


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        ("hamiltonian:\n  type: eigenvalues\n  energies: [1.0]\ndt: -1.0\n", 4, "dt"),
        ("hamiltonian:\n  type: eigenvalues\n  energies: [1.0, 2.0]\ninitial_state: [1.0]\n", None, "initial_state"),
        ("hamiltonian:\n  type: eigenvalues\n  energies: [1.0]\nt_span: [2.0, 1.0]\n", None, "t_span"),
        ("hamiltonian:\n  type: eigenvalues\n  energies: [1.0]\nbogus: 3\n", 4, "bogus"),
        ("hamiltonian:\n  type: magic\n", 2, "hamiltonian"),
    ],
)
def test_validation_errors(text, line, fragment):
    with pytest.raises(ConfigError) as exc:
        load_config_text(text)
    assert fragment in str(exc.value)
    if line is not None:
        assert exc.value.line == line


def test_gaussian_needs_grid_source():
    with pytest.raises(ConfigError, match="gaussian"):
        load_config_text("hamiltonian: {type: eigenvalues, energies: [1.0]}\ninitial_state: {kind: gaussian}\n")


def test_inline_matrix_needs_entries_or_path():
    with pytest.raises(ConfigError):
        load_config_text("hamiltonian: {type: inline_matrix}\n")
    with pytest.raises(ConfigError):
        load_config_text("hamiltonian: {type: inline_matrix, entries: [[1, 2]]}\n")


def test_top_level_must_be_mapping():
    with pytest.raises(ConfigError):
        load_config_text("- 1\n- 2\n")


@pytest.mark.parametrize("text", [TWO_LEVEL, SIGMA_Y])
def test_dump_then_load_is_identity(text):
    cfg = load_config_text(text)
    again = load_config_text(dump_config(cfg))
    assert again == cfg


def test_load_config_from_file(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(TWO_LEVEL, encoding="utf-8")
    assert isinstance(load_config(path), RunConfig)

    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.yaml")


SHIPPED_CONFIGS = sorted((Path(__file__).resolve().parents[2] / "configs").glob("*.yaml"))


@pytest.mark.parametrize("path", SHIPPED_CONFIGS, ids=lambda p: p.name)
def test_shipped_configs_load(path):
    cfg = load_config(path)
    assert load_config_text(dump_config(cfg)) == cfg
