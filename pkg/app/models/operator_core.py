# app/models/operator_core.py
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel, ConfigDict

from app.models.errors import LagrangeError
from app.utils.arrays import readonly
from app.utils.fingerprint import array_fingerprint

logger = logging.getLogger(__name__)

HERMITIAN_RTOL = 1e-12
UNITARY_TOL = 1e-12
INVERTIBILITY_TOL = 1e-10


class NotHermitian(LagrangeError, ValueError):
    pass


class NotUnitary(LagrangeError, ValueError):
    pass


class InvertibilityReport(BaseModel):
    model_config = ConfigDict(frozen=True, ser_json_inf_nan="strings")

    invertible: bool
    min_abs_eigenvalue: float
    condition_number: float
    tolerance_used: float


class SingularRealPart(LagrangeError):
    def __init__(self, report: InvertibilityReport) -> None:
        self.report = report
        super().__init__(
            "real part of the Hamiltonian is not invertible: "
            f"min |eigenvalue| = {report.min_abs_eigenvalue:.3e} "
            f"<= tolerance {report.tolerance_used:.3e}"
        )


# ---------------- Types ----------------
@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """
    Complex N x N Hermitian matrix plus the action unit hbar.

    Validated at construction to HERMITIAN_RTOL relative to the largest entry,
    then stored exactly Hermitian ((H + H^dagger) / 2).
    """

    entries: np.ndarray
    hbar: float = 1.0
    rtol: float = field(default=HERMITIAN_RTOL, repr=False)

    def __post_init__(self) -> None:
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim == 0:
            m = m.reshape(1, 1)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise NotHermitian(f"expected a square N x N matrix with N >= 1, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise NotHermitian("matrix has non-finite entries")
        if not self.hbar > 0:
            raise NotHermitian(f"hbar must be positive, got {self.hbar}")

        scale = float(np.max(np.abs(m))) if m.size else 0.0
        asym = float(np.max(np.abs(m - m.conj().T)))
        if asym > self.rtol * max(scale, np.finfo(float).tiny):
            raise NotHermitian(f"matrix is not Hermitian: max |H - H^dagger| = {asym:.3e}")

        object.__setattr__(self, "entries", readonly((m + m.conj().T) / 2))
        object.__setattr__(self, "hbar", float(self.hbar))

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)


@dataclass(frozen=True, eq=False)
class RealImagSplit:
    h_real: np.ndarray
    h_imag: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "h_real", readonly(np.asarray(self.h_real, dtype=float)))
        object.__setattr__(self, "h_imag", readonly(np.asarray(self.h_imag, dtype=float)))

    @property
    def dim(self) -> int:
        return int(self.h_real.shape[0])

    def fingerprint(self, hbar: float) -> str:
        """Identity of the (split, hbar) pair that derived matrices are built from."""
        return array_fingerprint(self.h_real, self.h_imag, scalars=(hbar,))


@dataclass(frozen=True, eq=False)
class RegularizingRotation:
    unitary: np.ndarray
    eigenvalues: np.ndarray
    near_zero: tuple[int, ...] = ()


# ---------------- Operations ----------------
def split(H: HermitianOperator) -> RealImagSplit:
    # entries are stored exactly Hermitian, so both parts carry their symmetry exactly
    return RealImagSplit(h_real=H.entries.real, h_imag=H.entries.imag)


def check_real_part_invertible(s: RealImagSplit, tol: float = INVERTIBILITY_TOL) -> InvertibilityReport:
    """
    Relative spectral criterion: invertible iff
        min |eig(H^R)| > tol * max |eig(H^R)|
    tolerance_used is the absolute threshold tol * max |eig(H^R)|.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")

    abs_eigs = np.abs(np.linalg.eigvalsh(s.h_real))
    max_abs = float(abs_eigs.max())
    min_abs = float(abs_eigs.min())
    threshold = tol * max_abs

    invertible = min_abs > threshold
    condition = max_abs / min_abs if min_abs > 0 else float("inf")

    return InvertibilityReport(
        invertible=invertible,
        min_abs_eigenvalue=min_abs,
        condition_number=condition,
        tolerance_used=threshold,
    )


def invert_real_part(s: RealImagSplit, tol: float = INVERTIBILITY_TOL) -> np.ndarray:
    report = check_real_part_invertible(s, tol)
    if not report.invertible:
        raise SingularRealPart(report)

    w, Q = np.linalg.eigh(s.h_real)
    inv = (Q / w) @ Q.T
    return (inv + inv.T) / 2


def change_basis(H: HermitianOperator, U: np.ndarray, tol: float = UNITARY_TOL) -> HermitianOperator:
    U = np.asarray(U, dtype=complex)
    if U.shape != (H.dim, H.dim):
        raise NotUnitary(f"unitary must be {H.dim}x{H.dim}, got shape {U.shape}")

    defect = float(np.max(np.abs(U.conj().T @ U - np.eye(H.dim))))
    if defect > tol:
        raise NotUnitary(f"matrix is not unitary: max |U^dagger U - I| = {defect:.3e}")

    return HermitianOperator(U.conj().T @ H.entries @ U, hbar=H.hbar, rtol=H.rtol)


def regularizing_rotation(H: HermitianOperator, tol: float = INVERTIBILITY_TOL) -> RegularizingRotation:
    """
    Eigenvector unitary of H, columns in ascending eigenvalue order.

    Each column is phase-fixed so its dominant component is real positive
    (ties go to the lowest index). Eigenvalues within tol * max|e| of zero
    are reported in near_zero, not rejected.
    """
    w, V = np.linalg.eigh(H.entries)
    V = V.astype(complex, copy=True)

    for j in range(V.shape[1]):
        mags = np.abs(V[:, j])
        # first index within round-off of the maximum
        k = int(np.flatnonzero(mags >= mags.max() * (1 - 1e-9))[0])
        V[:, j] *= np.conj(V[k, j]) / mags[k]
        V[k, j] = mags[k]

    scale = float(np.max(np.abs(w)))
    near_zero = tuple(int(i) for i in np.flatnonzero(np.abs(w) <= tol * scale))
    if near_zero:
        logger.warning("[rotation] %d eigenvalue(s) within %.1e of zero: indices %s", len(near_zero), tol, near_zero)

    return RegularizingRotation(unitary=readonly(V), eigenvalues=readonly(w), near_zero=near_zero)
