# app/models/lagrangian_dynamics.py
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from app.models.hamiltonian_dynamics import (
    RECOMPUTE_TOL,
    InconsistentGenerator,
    RealPhaseState,
    ensure_same_source,
    hamilton_function,
)
from app.models.operator_core import RealImagSplit
from app.utils.arrays import close_to, readonly

# Notation used below (all real N x N):
#   R = H^R (symmetric), I = H^I (antisymmetric), Ri = R^-1 (symmetric)


@dataclass(frozen=True, eq=False)
class LagrangianCoeffs:
    """
    L(q, qdot) = qdot.l_qdqd.qdot + q.l_qqd.qdot + q.l_qq.q

    l_qdqd = (hbar/2) Ri
    l_qqd  = I Ri
    l_qq   = -(1/2hbar) (I Ri I + R)
    """

    l_qdqd: np.ndarray
    l_qqd: np.ndarray
    l_qq: np.ndarray
    hbar: float
    fingerprint: str

    @property
    def dim(self) -> int:
        return int(self.l_qdqd.shape[0])


@dataclass(frozen=True, eq=False)
class LagrangianSystem:
    """qddot = l1.qdot + l0.q"""

    l0: np.ndarray
    l1: np.ndarray
    coeffs: LagrangianCoeffs
    hbar: float
    fingerprint: str

    @property
    def dim(self) -> int:
        return int(self.l0.shape[0])

    def verify(self, split: RealImagSplit, tol: float = RECOMPUTE_TOL) -> None:
        """
        Check the fingerprint, then recompute l0, l1 and the coefficient blocks
        from `split` and the inverse stored in l_qdqd.
        """
        ensure_same_source(self.fingerprint, split.fingerprint(self.hbar))
        Ri = 2.0 * self.coeffs.l_qdqd / self.hbar
        R = split.h_real
        if not close_to(R @ Ri, np.eye(self.dim), tol * max(1.0, float(np.linalg.cond(R)))):
            raise InconsistentGenerator("l_qdqd is not hbar/2 times the inverse of the real part")

        rebuilt = build_lagrangian_system(split, Ri, self.hbar)
        pairs = {
            "l0": (self.l0, rebuilt.l0),
            "l1": (self.l1, rebuilt.l1),
            "l_qqd": (self.coeffs.l_qqd, rebuilt.coeffs.l_qqd),
            "l_qq": (self.coeffs.l_qq, rebuilt.coeffs.l_qq),
        }
        for name, (have, want) in pairs.items():
            if not close_to(have, want, tol):
                raise InconsistentGenerator(f"{name} does not match the split it claims to come from")


@dataclass(frozen=True, eq=False)
class LagrangianState:
    q: np.ndarray
    qdot: np.ndarray
    t: float = 0.0

    def __post_init__(self) -> None:
        q = np.asarray(self.q, dtype=float).reshape(-1)
        qdot = np.asarray(self.qdot, dtype=float).reshape(-1)
        if q.shape != qdot.shape:
            raise ValueError(f"q and qdot must have equal length, got {q.size} and {qdot.size}")
        object.__setattr__(self, "q", readonly(q))
        object.__setattr__(self, "qdot", readonly(qdot))
        object.__setattr__(self, "t", float(self.t))

    @property
    def dim(self) -> int:
        return int(self.q.size)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.qdot])

    @classmethod
    def from_vector(cls, y: np.ndarray, t: float = 0.0) -> "LagrangianState":
        y = np.asarray(y, dtype=float)
        n = y.size // 2
        return cls(q=y[:n], qdot=y[n:], t=t)


def _symmetrize(m: np.ndarray) -> np.ndarray:
    return (m + m.T) / 2


# ---------------- Construction ----------------
def build_lagrangian_coeffs(split: RealImagSplit, hr_inv: np.ndarray, hbar: float = 1.0) -> LagrangianCoeffs:
    R, I = split.h_real, split.h_imag
    Ri = np.asarray(hr_inv, dtype=float)

    l_qdqd = _symmetrize(0.5 * hbar * Ri)
    l_qqd = I @ Ri
    l_qq = _symmetrize(-(I @ Ri @ I + R) / (2.0 * hbar))

    return LagrangianCoeffs(
        l_qdqd=readonly(l_qdqd),
        l_qqd=readonly(l_qqd),
        l_qq=readonly(l_qq),
        hbar=float(hbar),
        fingerprint=split.fingerprint(hbar),
    )


def build_lagrangian_system(split: RealImagSplit, hr_inv: np.ndarray, hbar: float = 1.0) -> LagrangianSystem:
    """
    l0 = -(1/hbar^2) (R I Ri I + R^2)
    l1 =  (1/hbar)   (I + R I Ri)
    """
    R, I = split.h_real, split.h_imag
    Ri = np.asarray(hr_inv, dtype=float)

    l0 = -(R @ I @ Ri @ I + R @ R) / hbar**2
    l1 = (I + R @ I @ Ri) / hbar

    coeffs = build_lagrangian_coeffs(split, Ri, hbar)
    return LagrangianSystem(
        l0=readonly(l0),
        l1=readonly(l1),
        coeffs=coeffs,
        hbar=float(hbar),
        fingerprint=coeffs.fingerprint,
    )


# ---------------- Lagrange function ----------------
def evaluate_lagrangian(s: LagrangianState, c: LagrangianCoeffs) -> float:
    q, qd = s.q, s.qdot
    return float(qd @ c.l_qdqd @ qd + q @ c.l_qqd @ qd + q @ c.l_qq @ q)


def lagrangian_expanded(s: LagrangianState, split: RealImagSplit, hr_inv: np.ndarray, hbar: float = 1.0) -> float:
    """The Lagrange function written directly in R, I and Ri, without the coefficient blocks."""
    q, qd = s.q, s.qdot
    R, I, Ri = split.h_real, split.h_imag, np.asarray(hr_inv, dtype=float)

    kinetic = 0.5 * hbar * (qd @ Ri @ qd)
    mixed = q @ I @ (Ri @ qd)
    potential = -(q @ (I @ Ri @ I + R) @ q) / (2.0 * hbar)
    return float(kinetic + mixed + potential)


def lagrangian_block_form(s: LagrangianState, split: RealImagSplit, hr_inv: np.ndarray, hbar: float = 1.0) -> float:
    """
    L = kappa . K . kappa with kappa = (q, qdot) and

        K = [[ -(1/2hbar)(I Ri I + R),  (1/2) I Ri   ],
             [ -(1/2) Ri I,             (hbar/2) Ri  ]]
    """
    R, I, Ri = split.h_real, split.h_imag, np.asarray(hr_inv, dtype=float)
    K = np.block(
        [
            [-(I @ Ri @ I + R) / (2.0 * hbar), 0.5 * I @ Ri],
            [-0.5 * Ri @ I, 0.5 * hbar * Ri],
        ]
    )
    kappa = s.as_vector()
    return float(kappa @ K @ kappa)


def legendre_lagrangian(s: LagrangianState, split: RealImagSplit, hr_inv: np.ndarray, hbar: float = 1.0) -> float:
    """L = p.qdot - H(q, p) with p from the momentum inversion."""
    p = momentum_from_velocity(s, split, hr_inv, hbar)
    h = hamilton_function(RealPhaseState(q=s.q, p=p, t=s.t), split, hbar)
    return float(p @ s.qdot - h)


def lagrangian_energy(s: LagrangianState, c: LagrangianCoeffs) -> float:
    """E = qdot . dL/dqdot - L; equals H(q, p) at the Legendre-related point."""
    dl_dqdot = 2.0 * (c.l_qdqd @ s.qdot) + c.l_qqd.T @ s.q
    return float(s.qdot @ dl_dqdot - evaluate_lagrangian(s, c))


# ---------------- Legendre map ----------------
def momentum_from_velocity(
    s: LagrangianState, split: RealImagSplit, hr_inv: np.ndarray, hbar: float = 1.0
) -> np.ndarray:
    """p = Ri (hbar qdot - I q)"""
    return np.asarray(hr_inv, dtype=float) @ (hbar * s.qdot - split.h_imag @ s.q)


def velocity_from_momentum(s: RealPhaseState, split: RealImagSplit, hbar: float = 1.0) -> np.ndarray:
    """qdot = (R p + I q) / hbar"""
    return (split.h_real @ s.p + split.h_imag @ s.q) / hbar


# ---------------- Equations of motion ----------------
def lagrange_rhs(s: LagrangianState, sys: LagrangianSystem) -> np.ndarray:
    return sys.l1 @ s.qdot + sys.l0 @ s.q


def euler_lagrange_rhs(s: LagrangianState, c: LagrangianCoeffs) -> np.ndarray:
    """
    qddot from the coefficient blocks, reading (L^{qdqd})^-1 as the matrix inverse:
        qddot = (1/2) A^-1 (B - B^T) qdot + A^-1 C q
    with A = l_qdqd, B = l_qqd, C = l_qq.
    """
    A_inv = np.linalg.inv(c.l_qdqd)
    B = c.l_qqd
    return 0.5 * A_inv @ ((B - B.T) @ s.qdot) + A_inv @ (c.l_qq @ s.q)


def embed_first_order(sys: LagrangianSystem) -> np.ndarray:
    """d(q, qdot)/dt = [[0, 1], [l0, l1]] (q, qdot)"""
    n = sys.dim
    return np.block([[np.zeros((n, n)), np.eye(n)], [sys.l0, sys.l1]])


# ---------------- State reconstruction ----------------
def reconstruct_psi(s: LagrangianState, split: RealImagSplit, hr_inv: np.ndarray, hbar: float = 1.0) -> np.ndarray:
    return s.q + 1j * momentum_from_velocity(s, split, hr_inv, hbar)


def initial_lagrangian_state(psi0: np.ndarray, split: RealImagSplit, hbar: float = 1.0, t: float = 0.0) -> LagrangianState:
    psi0 = np.asarray(psi0, dtype=complex).reshape(-1)
    phase = RealPhaseState(q=psi0.real, p=psi0.imag, t=t)
    return LagrangianState(q=phase.q, qdot=velocity_from_momentum(phase, split, hbar), t=t)


def check_compatible(sys: LagrangianSystem, split: RealImagSplit) -> None:
    sys.verify(split)


# ---------------- Spectrum comparison ----------------
def sorted_spectrum(matrix: np.ndarray) -> np.ndarray:
    """Eigenvalues sorted by (real, imag)."""
    ev = np.linalg.eigvals(np.asarray(matrix))
    return ev[np.lexsort((ev.imag, ev.real))]


def spectrum_mismatch(a: np.ndarray, b: np.ndarray) -> float:
    """
    Largest eigenvalue distance under the optimal one-to-one pairing.

    Plain (real, imag) sorting mis-pairs conjugate eigenvalues whose real parts
    are round-off of opposite sign, so the pairing is an assignment problem.
    """
    ea = np.linalg.eigvals(np.asarray(a))
    eb = np.linalg.eigvals(np.asarray(b))
    if ea.size != eb.size:
        raise ValueError(f"spectra have different sizes: {ea.size} and {eb.size}")
    cost = np.abs(ea[:, None] - eb[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max()) if ea.size else 0.0
