# app/services/equivalence_runner.py
# End-to-end runs driven by a RunConfig:
# - builds the Hamiltonian from the configured source
# - optional eigenbasis rotation and zero-mode restriction
# - Schrodinger (phase-space) and Lagrangian evolutions from matched initial data
# - equivalence / spectrum / singularity / dispersion reports

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from app.config import Settings, get_settings
from app.models.errors import ConfigError
from app.models.hamiltonian_dynamics import (
    RealPhaseState,
    build_phase_generator,
    hamilton_function,
    state_from_psi,
)
from app.models.integrators import Trajectory, integrate
from app.models.lagrangian_dynamics import (
    LagrangianState,
    build_lagrangian_system,
    check_compatible,
    embed_first_order,
    initial_lagrangian_state,
    lagrangian_energy,
    sorted_spectrum,
    spectrum_mismatch,
)
from app.models.operator_core import (
    HermitianOperator,
    InvertibilityReport,
    RegularizingRotation,
    change_basis,
    check_real_part_invertible,
    invert_real_part,
    regularizing_rotation,
    split,
)
from app.models.representations import (
    GridSpec,
    SubspaceRestriction,
    build_coordinate_hamiltonian,
    build_eigenbasis_hamiltonian,
    build_kg_hamiltonian,
    builtin_potential,
    gaussian_state,
    kg_dispersion_check,
    restrict_nonzero_subspace,
)
from app.models.schemas import (
    BasisPreset,
    CoordinateSource,
    DispersionReport,
    EigenvaluesSource,
    EquivalenceReport,
    GaussianPreset,
    InlineMatrixSource,
    KleinGordonSource,
    RunConfig,
    SpectrumReport,
    Thresholds,
)
from app.services.io_helpers.input_reader import InputFileReader
from app.services.io_helpers.output_writer import RunOutputWriter
from app.utils.fingerprint import short

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PreparedProblem:
    """The operator actually split, with the initial state expressed in its basis."""

    hamiltonian: HermitianOperator
    psi0: np.ndarray
    grid: Optional[GridSpec] = None
    rotation: Optional[RegularizingRotation] = None
    restriction: Optional[SubspaceRestriction] = None

    @property
    def hbar(self) -> float:
        return self.hamiltonian.hbar


@dataclass(frozen=True, eq=False)
class EquivalenceRun:
    report: EquivalenceReport
    schrodinger: Optional[Trajectory] = None
    lagrangian: Optional[Trajectory] = None


def sampling_stride(t0: float, t1: float, dt: float, max_samples: int = 1001) -> int:
    """Steps between recorded samples so a trajectory holds at most max_samples rows."""
    n_steps = max(1, math.ceil((t1 - t0) / dt - 1e-9))
    return max(1, math.ceil(n_steps / (max_samples - 1)))


def check_thresholds(report: EquivalenceReport, thresholds: Optional[Thresholds]) -> list[str]:
    """Failure messages; a configured threshold whose metric is missing counts as failed."""
    if thresholds is None:
        return []

    failures: list[str] = []
    for name in ("max_state_deviation", "norm_drift", "energy_drift", "spectrum_mismatch"):
        limit = getattr(thresholds, name)
        if limit is None:
            continue
        value = getattr(report, name)
        if value is None:
            failures.append(f"{name}: not computed (limit {limit:.3e})")
        elif value > limit:
            failures.append(f"{name}: {value:.3e} > {limit:.3e}")
    return failures


class EquivalenceRunner:
    """
    Flow for one config:
      source -> HermitianOperator (+ grid) -> initial psi
      -> [regularizing rotation] -> [zero-mode restriction]
      -> split -> invertibility check
      -> phase generator + Lagrangian embedding -> both evolutions -> metrics
    """

    def __init__(
        self,
        settings: Optional[Settings] = None,
        reader: Optional[InputFileReader] = None,
        tol: Optional[float] = None,
    ) -> None:
        self.settings = settings or get_settings()
        self.reader = reader or InputFileReader()
        self.tol_override = tol

    def tolerance(self, cfg: RunConfig) -> float:
        if self.tol_override is not None:
            return self.tol_override
        if cfg.tolerance is not None:
            return cfg.tolerance
        return self.settings.invertibility_tol

    # --------------------------
    # Problem construction
    # --------------------------
    def build_hamiltonian(self, cfg: RunConfig) -> tuple[HermitianOperator, Optional[GridSpec]]:
        src = cfg.hamiltonian
        rtol = self.settings.hermitian_tol
        try:
            if isinstance(src, InlineMatrixSource):
                return self._inline_hamiltonian(cfg, src, rtol), None

            if isinstance(src, EigenvaluesSource):
                return build_eigenbasis_hamiltonian(np.array(src.energies), hbar=cfg.effective_hbar), None

            if isinstance(src, CoordinateSource):
                grid = GridSpec(n_points=src.grid.n_points, length=src.grid.length)
                V = self._potential(grid, src)
                return build_coordinate_hamiltonian(grid, V, mass=src.mass, hbar=cfg.effective_hbar), grid

            if isinstance(src, KleinGordonSource):
                grid = GridSpec(n_points=src.grid.n_points, length=src.grid.length)
                return build_kg_hamiltonian(grid, src.mass, src.c_light, cfg.effective_hbar), grid
        except ValueError as e:
            # NotHermitian is a ValueError too
            raise ConfigError(f"hamiltonian: {e}") from e

        raise ConfigError(f"unsupported hamiltonian source: {type(src).__name__}")

    def _inline_hamiltonian(self, cfg: RunConfig, src: InlineMatrixSource, rtol: float) -> HermitianOperator:
        if src.entries is not None:
            rows = [[complex(*e) if isinstance(e, (tuple, list)) else complex(e) for e in row] for row in src.entries]
            return HermitianOperator(np.array(rows, dtype=complex), hbar=cfg.effective_hbar, rtol=rtol)

        mf = self.reader.read_matrix(src.path)
        if mf.hbar is None:
            return HermitianOperator(mf.entries, hbar=cfg.effective_hbar, rtol=rtol)
        if cfg.hbar is not None and not math.isclose(cfg.hbar, mf.hbar, rel_tol=1e-12):
            raise ConfigError(f"hbar {cfg.hbar} in config conflicts with hbar {mf.hbar} in {src.path}")
        return HermitianOperator(mf.entries, hbar=mf.hbar, rtol=rtol)

    def _potential(self, grid: GridSpec, src: CoordinateSource) -> np.ndarray:
        pot = src.potential
        if pot.kind != "table":
            return builtin_potential(
                grid, pot.kind, mass=src.mass, omega=pot.omega, depth=pot.depth, width=pot.width
            )

        xs, vs = self.reader.read_potential_table(pot.path)
        order = np.argsort(xs)
        xs, vs = xs[order], vs[order]
        # sampled at the grid points, periodic wrap outside the table range
        return np.interp(grid.x, xs, vs, period=grid.length)

    def initial_state(self, cfg: RunConfig, dim: int, grid: Optional[GridSpec]) -> np.ndarray:
        init = cfg.initial_state
        if isinstance(init, BasisPreset):
            if init.index >= dim:
                raise ConfigError(f"initial_state: basis index {init.index} out of range for dim {dim}")
            psi = np.zeros(dim, dtype=complex)
            psi[init.index] = 1.0
            return psi

        if isinstance(init, GaussianPreset):
            if grid is None:
                raise ConfigError("initial_state: gaussian preset needs a grid-based Hamiltonian")
            return gaussian_state(grid, x0=init.x0, width=init.width, k0=init.k0)

        psi = np.array([complex(*e) if isinstance(e, (tuple, list)) else complex(e) for e in init], dtype=complex)
        if psi.size != dim:
            raise ConfigError(f"initial_state has {psi.size} components, Hamiltonian has dim {dim}")
        return psi

    def prepare(self, cfg: RunConfig) -> PreparedProblem:
        H, grid = self.build_hamiltonian(cfg)
        psi0 = self.initial_state(cfg, H.dim, grid)
        tol = self.tolerance(cfg)

        rotation = None
        if cfg.regularize:
            rotation = regularizing_rotation(H, tol)
            U = rotation.unitary
            H = change_basis(H, U, self.settings.unitary_tol)
            psi0 = U.conj().T @ psi0
            logger.info("[run] rotated to the eigenbasis of H (dim %d)", H.dim)

        restriction = None
        if cfg.restrict_zero_modes:
            restriction = restrict_nonzero_subspace(H, tol)
            if restriction.removed:
                dropped = float(np.linalg.norm(psi0 - restriction.embed(restriction.project(psi0))))
                if dropped > 0:
                    logger.info("[run] initial state has weight %.3e on removed zero modes", dropped)
            H = restriction.reduced
            psi0 = restriction.project(psi0)

        return PreparedProblem(hamiltonian=H, psi0=psi0, grid=grid, rotation=rotation, restriction=restriction)

    # --------------------------
    # Reports
    # --------------------------
    def check_singularity(self, cfg: RunConfig) -> InvertibilityReport:
        problem = self.prepare(cfg)
        return check_real_part_invertible(split(problem.hamiltonian), self.tolerance(cfg))

    def run_equivalence(self, cfg: RunConfig) -> EquivalenceRun:
        problem = self.prepare(cfg)
        tol = self.tolerance(cfg)
        hbar = problem.hbar

        # 1) split + invertibility
        s = split(problem.hamiltonian)
        singularity = check_real_part_invertible(s, tol)
        if not singularity.invertible:
            logger.warning(
                "[run] singular real part: min |eig| %.3e <= %.3e",
                singularity.min_abs_eigenvalue, singularity.tolerance_used,
            )
            return EquivalenceRun(report=EquivalenceReport(singularity=singularity))

        hr_inv = invert_real_part(s, tol)

        # 2) generators
        gen = build_phase_generator(s, hbar)
        system = build_lagrangian_system(s, hr_inv, hbar)
        check_compatible(system, s)
        A_l = embed_first_order(system)
        logger.debug("[run] sources: phase %s, lagrangian %s", short(gen.fingerprint), short(system.fingerprint))

        # 3) matched initial data
        t0, t1 = cfg.t_span
        phase0 = state_from_psi(problem.psi0, t=t0)
        lag0 = initial_lagrangian_state(problem.psi0, s, hbar, t=t0)
        stride = sampling_stride(t0, t1, cfg.dt, self.settings.max_samples)

        # 4) evolutions
        traj_s = integrate(gen.matrix, phase0.as_vector(), t0, t1, cfg.dt, record_every=stride, fingerprint=gen.fingerprint)
        traj_l = integrate(A_l, lag0.as_vector(), t0, t1, cfg.dt, record_every=stride, fingerprint=system.fingerprint)

        # 5) metrics
        n = s.dim
        qs, ps = traj_s.states[:, :n], traj_s.states[:, n:]
        ql, qdl = traj_l.states[:, :n], traj_l.states[:, n:]
        # p = Ri (hbar qdot - I q), row-wise
        pl = (hbar * qdl - ql @ s.h_imag.T) @ hr_inv.T

        deviation = float(np.max(np.sqrt(np.sum((qs - ql) ** 2 + (ps - pl) ** 2, axis=1))))

        norm_s = np.sum(qs**2 + ps**2, axis=1)
        norm_l = np.sum(ql**2 + pl**2, axis=1)
        norm_drift = float(max(np.max(np.abs(norm_s - norm_s[0])), np.max(np.abs(norm_l - norm_l[0]))))

        energy_s = np.array([hamilton_function(RealPhaseState(q=q, p=p), s, hbar) for q, p in zip(qs, ps)])
        energy_l = np.array(
            [lagrangian_energy(LagrangianState(q=q, qdot=qd), system.coeffs) for q, qd in zip(ql, qdl)]
        )
        energy_drift = float(
            max(np.max(np.abs(energy_s - energy_s[0])), np.max(np.abs(energy_l - energy_l[0])))
        )

        mismatch = spectrum_mismatch(gen.matrix, A_l)

        report = EquivalenceReport(
            max_state_deviation=deviation,
            norm_drift=norm_drift,
            energy_drift=energy_drift,
            spectrum_mismatch=mismatch,
            singularity=singularity,
        )
        logger.info(
            "[run] deviation %.3e, norm drift %.3e, energy drift %.3e, spectrum mismatch %.3e",
            deviation, norm_drift, energy_drift, mismatch,
        )
        return EquivalenceRun(report=report, schrodinger=traj_s, lagrangian=traj_l)

    def run_spectrum_report(self, cfg: RunConfig) -> SpectrumReport:
        problem = self.prepare(cfg)
        tol = self.tolerance(cfg)
        hbar = problem.hbar

        s = split(problem.hamiltonian)
        gen = build_phase_generator(s, hbar)
        phase_ev = [(float(z.real), float(z.imag)) for z in sorted_spectrum(gen.matrix)]

        singularity = check_real_part_invertible(s, tol)
        if not singularity.invertible:
            logger.warning("[spectrum] singular real part; Lagrangian embedding skipped")
            return SpectrumReport(phase_generator=phase_ev, singularity=singularity)

        system = build_lagrangian_system(s, invert_real_part(s, tol), hbar)
        A_l = embed_first_order(system)
        return SpectrumReport(
            phase_generator=phase_ev,
            lagrangian_embedding=[(float(z.real), float(z.imag)) for z in sorted_spectrum(A_l)],
            mismatch=spectrum_mismatch(gen.matrix, A_l),
            singularity=singularity,
        )

    def run_kg_dispersion(self, cfg: RunConfig, mode_index: Optional[int] = None) -> DispersionReport:
        src = cfg.hamiltonian
        if not isinstance(src, KleinGordonSource):
            raise ConfigError("kg-dispersion needs a klein_gordon hamiltonian source")

        mode = src.mode_index if mode_index is None else mode_index
        grid = GridSpec(n_points=src.grid.n_points, length=src.grid.length)
        try:
            omega_m, omega_t = kg_dispersion_check(grid, src.mass, src.c_light, cfg.effective_hbar, mode)
        except ValueError as e:
            raise ConfigError(f"kg-dispersion: {e}") from e

        return DispersionReport(
            mode_index=mode,
            wavenumber=grid.mode_wavenumber(mode),
            omega_measured=omega_m,
            omega_theory=omega_t,
            relative_error_omega_sq=abs(omega_m**2 - omega_t**2) / omega_t**2,
        )

    # --------------------------
    # Full run with file outputs
    # --------------------------
    def execute(self, cfg: RunConfig, out_dir: str | Path) -> EquivalenceReport:
        writer = RunOutputWriter(out_dir)
        result = self.run_equivalence(cfg)

        if "schrodinger_trajectory" in cfg.outputs and result.schrodinger is not None:
            writer.emit_trajectory(result.schrodinger, "schrodinger_trajectory.csv", kind="phase")
        if "lagrangian_trajectory" in cfg.outputs and result.lagrangian is not None:
            writer.emit_trajectory(result.lagrangian, "lagrangian_trajectory.csv", kind="lagrangian")
        if "equivalence_report" in cfg.outputs:
            writer.write_report(result.report, "equivalence_report.json")
        if "spectrum_report" in cfg.outputs:
            writer.write_report(self.run_spectrum_report(cfg), "spectrum_report.json")

        return result.report


# Module-level entry points (default settings, files resolved against base_dir)
def run_equivalence(cfg: RunConfig, *, tol: Optional[float] = None, base_dir: str | Path | None = None) -> EquivalenceReport:
    return EquivalenceRunner(reader=InputFileReader(base_dir), tol=tol).run_equivalence(cfg).report


def run_spectrum_report(cfg: RunConfig, *, tol: Optional[float] = None, base_dir: str | Path | None = None) -> SpectrumReport:
    return EquivalenceRunner(reader=InputFileReader(base_dir), tol=tol).run_spectrum_report(cfg)
