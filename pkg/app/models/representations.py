# app/models/representations.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from app.models.errors import LagrangeError
from app.models.integrators import integrate, spectral_radius
from app.models.lagrangian_dynamics import build_lagrangian_system, embed_first_order
from app.models.operator_core import (
    INVERTIBILITY_TOL,
    HermitianOperator,
    invert_real_part,
    split,
)
from app.utils.arrays import readonly

logger = logging.getLogger(__name__)


class AllZeroSpectrum(LagrangeError):
    pass


# ---------------- Grid ----------------
@dataclass(frozen=True)
class GridSpec:
    """Periodic 1-D grid x_j = -length/2 + j*dx, j = 0..n_points-1."""

    n_points: int = 128
    length: float = 32.0

    def __post_init__(self) -> None:
        if self.n_points < 4:
            raise ValueError(f"n_points must be >= 4, got {self.n_points}")
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length}")
        if self.n_points & (self.n_points - 1):
            logger.debug("[grid] n_points=%d is not a power of two", self.n_points)

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @property
    def x(self) -> np.ndarray:
        return -self.length / 2 + self.dx * np.arange(self.n_points)

    @property
    def wavenumbers(self) -> np.ndarray:
        """2*pi * FFT-ordered frequencies / length."""
        return 2 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)

    def mode_wavenumber(self, mode_index: int) -> float:
        return 2 * np.pi * mode_index / self.length


@dataclass(frozen=True, eq=False)
class SpectralKernel:
    """Diagonal Fourier symbol of a real-symmetric translation-invariant operator."""

    wavenumbers: np.ndarray
    multipliers: np.ndarray

    def __post_init__(self) -> None:
        mult = np.asarray(self.multipliers)
        if np.iscomplexobj(mult):
            raise ValueError("spectral multipliers must be real")
        object.__setattr__(self, "wavenumbers", readonly(np.asarray(self.wavenumbers, dtype=float)))
        object.__setattr__(self, "multipliers", readonly(mult.astype(float)))

    def apply(self, f: np.ndarray) -> np.ndarray:
        return np.fft.ifft(self.multipliers * np.fft.fft(f))

    def as_matrix(self) -> np.ndarray:
        """ifft . diag(symbol) . fft as an explicit n x n matrix, symmetrized exactly."""
        n = self.multipliers.size
        m = np.fft.ifft(self.multipliers[:, None] * np.fft.fft(np.eye(n), axis=0), axis=0).real
        return (m + m.T) / 2


def kinetic_kernel(grid: GridSpec, mass: float, hbar: float = 1.0) -> SpectralKernel:
    k = grid.wavenumbers
    return SpectralKernel(wavenumbers=k, multipliers=hbar**2 * k**2 / (2.0 * mass))


def laplacian_kernel(grid: GridSpec) -> SpectralKernel:
    k = grid.wavenumbers
    return SpectralKernel(wavenumbers=k, multipliers=-(k**2))


def kg_kernel(grid: GridSpec, mass: float, c_light: float, hbar: float = 1.0) -> SpectralKernel:
    # sqrt(m^2 c^4 + hbar^2 c^2 k^2): the sign that reproduces the Klein-Gordon dispersion
    k = grid.wavenumbers
    return SpectralKernel(wavenumbers=k, multipliers=np.sqrt(mass**2 * c_light**4 + (hbar * c_light * k) ** 2))


# ---------------- Eigenbasis ----------------
def build_eigenbasis_hamiltonian(energies: np.ndarray, hbar: float = 1.0) -> HermitianOperator:
    e = np.asarray(energies, dtype=float).reshape(-1)
    return HermitianOperator(np.diag(e).astype(complex), hbar=hbar)


@dataclass(frozen=True, eq=False)
class SubspaceRestriction:
    """
    isometry: N x (N-k) with orthonormal columns spanning the kept eigendirections.
    reduced = isometry^dagger H isometry (diagonal, kept eigenvalues ascending).
    """

    reduced: HermitianOperator
    isometry: np.ndarray
    removed: tuple[int, ...]

    def project(self, psi: np.ndarray) -> np.ndarray:
        return self.isometry.conj().T @ np.asarray(psi, dtype=complex)

    def embed(self, psi_reduced: np.ndarray) -> np.ndarray:
        return self.isometry @ np.asarray(psi_reduced, dtype=complex)


def restrict_nonzero_subspace(H: HermitianOperator, tol: float = INVERTIBILITY_TOL) -> SubspaceRestriction:
    w, V = np.linalg.eigh(H.entries)
    scale = float(np.max(np.abs(w)))
    keep = np.abs(w) > tol * scale
    if not np.any(keep):
        raise AllZeroSpectrum(f"every eigenvalue of the {H.dim}x{H.dim} Hamiltonian is within {tol:.1e} of zero")

    removed = tuple(int(i) for i in np.flatnonzero(~keep))
    if removed:
        logger.info("[restrict] removed %d zero mode(s) of %d", len(removed), H.dim)
        isometry = V[:, keep]
        reduced = np.diag(w[keep]).astype(complex)
    else:
        isometry = np.eye(H.dim, dtype=complex)
        reduced = H.entries

    return SubspaceRestriction(
        reduced=HermitianOperator(reduced, hbar=H.hbar, rtol=H.rtol),
        isometry=readonly(isometry.astype(complex)),
        removed=removed,
    )


# ---------------- Coordinate representation ----------------
PotentialKind = Literal["zero", "harmonic", "square_well"]


def builtin_potential(
    grid: GridSpec,
    kind: PotentialKind,
    *,
    mass: float = 1.0,
    omega: float = 1.0,
    depth: float = 1.0,
    width: float = 1.0,
) -> np.ndarray:
    x = grid.x
    if kind == "zero":
        return np.zeros_like(x)
    if kind == "harmonic":
        return 0.5 * mass * omega**2 * x**2
    if kind == "square_well":
        return np.where(np.abs(x) <= width / 2, -depth, 0.0)
    raise ValueError(f"unknown potential kind: {kind}")


def build_coordinate_hamiltonian(
    grid: GridSpec, potential: np.ndarray, mass: float = 1.0, hbar: float = 1.0
) -> HermitianOperator:
    """H = -(hbar^2/2m) Laplacian + diag(V), kinetic part spectral (periodic)."""
    if not mass > 0:
        raise ValueError(f"mass must be positive, got {mass}")
    V = np.asarray(potential, dtype=float).reshape(-1)
    if V.size != grid.n_points:
        raise ValueError(f"potential has {V.size} samples, grid has {grid.n_points} points")

    matrix = kinetic_kernel(grid, mass, hbar).as_matrix() + np.diag(V)
    return HermitianOperator(matrix.astype(complex), hbar=hbar)


def coordinate_hamilton_functional(
    grid: GridSpec,
    potential: np.ndarray,
    mass: float,
    hbar: float,
    phi: np.ndarray,
    pi: np.ndarray,
    form: Literal["laplacian", "gradient"] = "laplacian",
) -> float:
    """
    dx-weighted Hamilton functional of psi = phi + i pi.

    laplacian: (1/2hbar) sum dx [ -(hbar^2/2m)(phi Lap phi + pi Lap pi) + V (phi^2 + pi^2) ]
    gradient:  (1/2hbar) sum dx [  (hbar^2/2m)(|d phi|^2 + |d pi|^2)    + V (phi^2 + pi^2) ]
    """
    V = np.asarray(potential, dtype=float)
    phi = np.asarray(phi, dtype=float)
    pi = np.asarray(pi, dtype=float)
    c = hbar**2 / (2.0 * mass)

    if form == "laplacian":
        lap = laplacian_kernel(grid)
        kinetic = -c * (phi @ lap.apply(phi).real + pi @ lap.apply(pi).real)
    elif form == "gradient":
        ik = 1j * grid.wavenumbers
        d_phi = np.fft.ifft(ik * np.fft.fft(phi))
        d_pi = np.fft.ifft(ik * np.fft.fft(pi))
        kinetic = c * (np.vdot(d_phi, d_phi).real + np.vdot(d_pi, d_pi).real)
    else:
        raise ValueError(f"unknown form: {form}")

    return float(grid.dx * (kinetic + V @ (phi**2 + pi**2)) / (2.0 * hbar))


def coordinate_lagrangian_functional(
    grid: GridSpec, H: HermitianOperator, phi: np.ndarray, phidot: np.ndarray
) -> float:
    """dx * [ -(1/2hbar) phi.H.phi + (hbar/2) phidot.H^-1.phidot ] for real H (nonlocal inverse, dense)."""
    h = H.entries.real
    h_inv = invert_real_part(split(H))
    phi = np.asarray(phi, dtype=float)
    phidot = np.asarray(phidot, dtype=float)
    return float(grid.dx * (-(phi @ h @ phi) / (2.0 * H.hbar) + 0.5 * H.hbar * (phidot @ h_inv @ phidot)))


def gaussian_state(grid: GridSpec, x0: float = 0.0, width: float = 1.0, k0: float = 0.0) -> np.ndarray:
    """exp(-(x-x0)^2 / (2 width^2) + i k0 x), normalized so sum |psi|^2 dx = 1."""
    x = grid.x
    psi = np.exp(-((x - x0) ** 2) / (2.0 * width**2) + 1j * k0 * x)
    return psi / math.sqrt(grid.dx * float(np.vdot(psi, psi).real))


# ---------------- Klein-Gordon ----------------
def build_kg_hamiltonian(grid: GridSpec, mass: float, c_light: float = 1.0, hbar: float = 1.0) -> HermitianOperator:
    if not mass > 0:
        raise ValueError(f"mass must be positive, got {mass}")
    if not c_light > 0:
        raise ValueError(f"c_light must be positive, got {c_light}")
    matrix = kg_kernel(grid, mass, c_light, hbar).as_matrix()
    return HermitianOperator(matrix.astype(complex), hbar=hbar)


def kg_squared_reference(grid: GridSpec, mass: float, c_light: float = 1.0, hbar: float = 1.0) -> np.ndarray:
    """Discretized m^2 c^4 - hbar^2 c^2 Laplacian."""
    lap = laplacian_kernel(grid).as_matrix()
    return mass**2 * c_light**4 * np.eye(grid.n_points) - (hbar * c_light) ** 2 * lap


def kg_theory_omega(grid: GridSpec, mass: float, c_light: float, hbar: float, mode_index: int) -> float:
    k = grid.mode_wavenumber(mode_index)
    return math.sqrt((c_light * k) ** 2 + (mass * c_light**2 / hbar) ** 2)


def _zero_crossings(times: np.ndarray, signal: np.ndarray) -> np.ndarray:
    s = np.asarray(signal)
    idx = np.flatnonzero(np.signbit(s[:-1]) != np.signbit(s[1:]))
    # linear interpolation inside each bracketing interval
    t0, t1 = times[idx], times[idx + 1]
    s0, s1 = s[idx], s[idx + 1]
    return t0 - s0 * (t1 - t0) / (s1 - s0)


def kg_dispersion_check(
    grid: GridSpec,
    mass: float,
    c_light: float = 1.0,
    hbar: float = 1.0,
    mode_index: int = 4,
    *,
    periods: float = 4.0,
    steps_per_period: int = 2000,
    stability_factor: float = 1.0,
) -> tuple[float, float]:
    """
    Evolve q(0) = cos(k x), qdot(0) = 0 under the Lagrangian form of the
    square-root Hamiltonian and measure the standing-wave angular frequency
    from zero crossings at the sample point x = 0.

    The step is the smaller of period / steps_per_period and
    stability_factor / rho(A). Samples are thinned back to about
    steps_per_period per period.

    Returns (omega_measured, omega_theory).
    """
    if not 0 <= mode_index <= grid.n_points // 2:
        raise ValueError(f"mode_index must be in [0, {grid.n_points // 2}], got {mode_index}")

    omega_theory = kg_theory_omega(grid, mass, c_light, hbar, mode_index)
    period = 2 * np.pi / omega_theory

    H = build_kg_hamiltonian(grid, mass, c_light, hbar)
    s = split(H)
    system = build_lagrangian_system(s, invert_real_part(s), hbar)
    A = embed_first_order(system)

    k = grid.mode_wavenumber(mode_index)
    q0 = np.cos(k * grid.x)
    y0 = np.concatenate([q0, np.zeros_like(q0)])

    sample_dt = period / steps_per_period
    rho = spectral_radius(A)
    dt = min(sample_dt, stability_factor / rho) if rho > 0 else sample_dt
    stride = max(1, int(sample_dt // dt))
    traj = integrate(
        A, y0, 0.0, periods * period + sample_dt, dt, record_every=stride, fingerprint=system.fingerprint
    )

    origin = int(np.argmin(np.abs(grid.x)))
    crossings = _zero_crossings(traj.times, traj.states[:, origin])
    if crossings.size < 2:
        raise LagrangeError(f"only {crossings.size} zero crossing(s) observed; increase periods")

    half_period = (crossings[-1] - crossings[0]) / (crossings.size - 1)
    omega_measured = float(np.pi / half_period)

    logger.info("[kg] mode %d: omega measured %.12g, theory %.12g", mode_index, omega_measured, omega_theory)
    return omega_measured, omega_theory
