# app/models/schemas.py
from __future__ import annotations

from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.models.operator_core import InvertibilityReport

OutputKind = Literal[
    "schrodinger_trajectory",
    "lagrangian_trajectory",
    "equivalence_report",
    "spectrum_report",
]

# a complex entry is either a real number or a [re, im] pair
ComplexEntry = Union[float, tuple[float, float]]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


# ---------------- Hamiltonian sources ----------------
class GridConfig(_Strict):
    n_points: int = Field(128, ge=4)
    length: float = Field(32.0, gt=0)


class PotentialConfig(_Strict):
    kind: Literal["zero", "harmonic", "square_well", "table"] = "zero"
    omega: float = 1.0
    depth: float = 1.0
    width: float = 1.0
    path: Optional[str] = None  # two-column (x, V) table when kind == "table"

    @model_validator(mode="after")
    def _table_needs_path(self) -> "PotentialConfig":
        if self.kind == "table" and not self.path:
            raise ValueError("potential kind 'table' requires 'path'")
        return self


class InlineMatrixSource(_Strict):
    type: Literal["inline_matrix"] = "inline_matrix"
    entries: Optional[list[list[ComplexEntry]]] = None
    path: Optional[str] = None

    @model_validator(mode="after")
    def _one_of_entries_or_path(self) -> "InlineMatrixSource":
        if (self.entries is None) == (self.path is None):
            raise ValueError("inline_matrix needs exactly one of 'entries' or 'path'")
        if self.entries is not None:
            n = len(self.entries)
            if n == 0 or any(len(row) != n for row in self.entries):
                raise ValueError("inline_matrix entries must be a non-empty square array")
        return self

    def static_dim(self) -> Optional[int]:
        return len(self.entries) if self.entries is not None else None


class EigenvaluesSource(_Strict):
    type: Literal["eigenvalues"] = "eigenvalues"
    energies: list[float] = Field(min_length=1)

    def static_dim(self) -> Optional[int]:
        return len(self.energies)


class CoordinateSource(_Strict):
    type: Literal["coordinate"] = "coordinate"
    grid: GridConfig = Field(default_factory=GridConfig)
    potential: PotentialConfig = Field(default_factory=PotentialConfig)
    mass: float = Field(1.0, gt=0)

    def static_dim(self) -> Optional[int]:
        return self.grid.n_points


class KleinGordonSource(_Strict):
    type: Literal["klein_gordon"] = "klein_gordon"
    grid: GridConfig = Field(default_factory=GridConfig)
    mass: float = Field(1.0, gt=0)
    c_light: float = Field(1.0, gt=0)
    mode_index: int = Field(4, ge=0)

    def static_dim(self) -> Optional[int]:
        return self.grid.n_points


HamiltonianSource = Annotated[
    Union[InlineMatrixSource, EigenvaluesSource, CoordinateSource, KleinGordonSource],
    Field(discriminator="type"),
]


# ---------------- Initial state ----------------
class BasisPreset(_Strict):
    kind: Literal["basis"] = "basis"
    index: int = Field(0, ge=0)


class GaussianPreset(_Strict):
    kind: Literal["gaussian"] = "gaussian"
    x0: float = 0.0
    width: float = Field(1.0, gt=0)
    k0: float = 0.0


InitialPreset = Annotated[Union[BasisPreset, GaussianPreset], Field(discriminator="kind")]


class Thresholds(_Strict):
    max_state_deviation: Optional[float] = Field(None, ge=0)
    norm_drift: Optional[float] = Field(None, ge=0)
    energy_drift: Optional[float] = Field(None, ge=0)
    spectrum_mismatch: Optional[float] = Field(None, ge=0)
    dispersion_rel: Optional[float] = Field(None, ge=0)


class RunConfig(_Strict):
    hamiltonian: HamiltonianSource
    # unset: the hbar header of an inline-matrix file, else 1.0
    hbar: Optional[float] = Field(None, gt=0)
    initial_state: Union[list[ComplexEntry], InitialPreset] = Field(default_factory=BasisPreset)
    t_span: tuple[float, float] = (0.0, 10.0)
    dt: float = Field(1e-3, gt=0)
    outputs: list[OutputKind] = Field(default_factory=lambda: ["equivalence_report"])

    # apply the eigenvector rotation before splitting (singular-basis remedy)
    regularize: bool = False
    # drop zero eigendirections before building the Lagrangian form
    restrict_zero_modes: bool = False

    tolerance: Optional[float] = Field(None, gt=0)
    thresholds: Optional[Thresholds] = None

    @property
    def effective_hbar(self) -> float:
        return 1.0 if self.hbar is None else self.hbar

    @model_validator(mode="after")
    def _check_span_and_dims(self) -> "RunConfig":
        t0, t1 = self.t_span
        if not t1 > t0:
            raise ValueError(f"t_span must be increasing, got ({t0}, {t1})")

        dim = self.hamiltonian.static_dim()
        if dim is not None and isinstance(self.initial_state, list) and len(self.initial_state) != dim:
            raise ValueError(f"initial_state has {len(self.initial_state)} components, Hamiltonian has dim {dim}")
        if dim is not None and isinstance(self.initial_state, BasisPreset) and self.initial_state.index >= dim:
            raise ValueError(f"basis index {self.initial_state.index} out of range for dim {dim}")
        if isinstance(self.initial_state, GaussianPreset) and not isinstance(
            self.hamiltonian, (CoordinateSource, KleinGordonSource)
        ):
            raise ValueError("gaussian initial state needs a coordinate or klein_gordon Hamiltonian")
        return self


# ---------------- Reports ----------------
class EquivalenceReport(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="strings")

    max_state_deviation: Optional[float] = Field(None, ge=0)
    norm_drift: Optional[float] = Field(None, ge=0)
    energy_drift: Optional[float] = Field(None, ge=0)
    spectrum_mismatch: Optional[float] = Field(None, ge=0)
    singularity: Optional[InvertibilityReport] = None


class SpectrumReport(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="strings")

    # eigenvalues as [re, im] pairs, sorted by (re, im)
    phase_generator: list[tuple[float, float]] = Field(default_factory=list)
    lagrangian_embedding: list[tuple[float, float]] = Field(default_factory=list)
    mismatch: Optional[float] = Field(None, ge=0)
    singularity: Optional[InvertibilityReport] = None


class DispersionReport(BaseModel):
    mode_index: int
    wavenumber: float
    omega_measured: float
    omega_theory: float
    relative_error_omega_sq: float = Field(ge=0)
