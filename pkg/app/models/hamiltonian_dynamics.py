# app/models/hamiltonian_dynamics.py
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from app.models.errors import LagrangeError
from app.models.operator_core import RealImagSplit
from app.utils.arrays import close_to, readonly

RECOMPUTE_TOL = 1e-10


class FingerprintMismatch(LagrangeError):
    pass


class InconsistentGenerator(LagrangeError, ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RealPhaseState:
    """psi = q + i p in a fixed basis, stamped with its time."""

    q: np.ndarray
    p: np.ndarray
    t: float = 0.0

    def __post_init__(self) -> None:
        q = np.asarray(self.q, dtype=float).reshape(-1)
        p = np.asarray(self.p, dtype=float).reshape(-1)
        if q.shape != p.shape:
            raise ValueError(f"q and p must have equal length, got {q.size} and {p.size}")
        object.__setattr__(self, "q", readonly(q))
        object.__setattr__(self, "p", readonly(p))
        object.__setattr__(self, "t", float(self.t))

    @property
    def dim(self) -> int:
        return int(self.q.size)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])

    @classmethod
    def from_vector(cls, y: np.ndarray, t: float = 0.0) -> "RealPhaseState":
        y = np.asarray(y, dtype=float)
        n = y.size // 2
        return cls(q=y[:n], p=y[n:], t=t)


@dataclass(frozen=True, eq=False)
class PhaseGenerator:
    matrix: np.ndarray
    hbar: float
    fingerprint: str

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0] // 2)

    def verify(self, split: RealImagSplit, tol: float = RECOMPUTE_TOL) -> None:
        """Check the fingerprint, then rebuild the blocks from `split` and compare."""
        ensure_same_source(self.fingerprint, split.fingerprint(self.hbar))
        if not close_to(self.matrix, _phase_blocks(split, self.hbar), tol):
            raise InconsistentGenerator("phase generator blocks do not match the split it claims to come from")


def ensure_same_source(*fingerprints: str) -> None:
    """Raise if derived objects were built from different (split, hbar) pairs."""
    distinct = {fp for fp in fingerprints if fp}
    if len(distinct) > 1:
        raise FingerprintMismatch(
            "objects built from different Hamiltonians: " + ", ".join(sorted(fp[:12] for fp in distinct))
        )


# ---------------- State conversion ----------------
def state_from_psi(psi: np.ndarray, t: float = 0.0) -> RealPhaseState:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return RealPhaseState(q=psi.real, p=psi.imag, t=t)


def psi_from_state(s: RealPhaseState) -> np.ndarray:
    return s.q + 1j * s.p


# ---------------- Generator / Hamilton's function ----------------
def _phase_blocks(s: RealImagSplit, hbar: float) -> np.ndarray:
    hr, hi = s.h_real, s.h_imag
    return np.block([[hi, hr], [-hr, hi]]) / hbar


def build_phase_generator(s: RealImagSplit, hbar: float = 1.0) -> PhaseGenerator:
    """
    d(q, p)/dt = (1/hbar) [[ H^I,  H^R],
                          [-H^R,  H^I]] (q, p)
    """
    matrix = _phase_blocks(s, hbar)
    return PhaseGenerator(matrix=readonly(matrix), hbar=float(hbar), fingerprint=s.fingerprint(hbar))


def hamilton_function(s: RealPhaseState, split: RealImagSplit, hbar: float = 1.0) -> float:
    """H(q, p) = (q.H^R.q + p.H^R.p - 2 q.H^I.p) / (2 hbar)  ( = <psi|H|psi> / 2hbar )."""
    q, p = s.q, s.p
    hr, hi = split.h_real, split.h_imag
    return float((q @ hr @ q + p @ hr @ p - 2.0 * (q @ hi @ p)) / (2.0 * hbar))


def hamilton_rhs(s: RealPhaseState, gen: PhaseGenerator) -> np.ndarray:
    return gen.matrix @ s.as_vector()


def norm_squared(s: RealPhaseState) -> float:
    return float(s.q @ s.q + s.p @ s.p)
