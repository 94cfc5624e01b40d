# app/models/integrators.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from app.models.errors import LagrangeError
from app.utils.arrays import readonly

logger = logging.getLogger(__name__)

# |R(i x)| <= 1 for classical RK4 up to x = 2*sqrt(2)
RK4_IMAG_STABILITY = 2.8


class NonFiniteState(LagrangeError, ArithmeticError):
    def __init__(self, step: int, t: float) -> None:
        self.step = step
        self.t = t
        super().__init__(f"state became non-finite at step {step} (t={t:.6g}); dt is probably too large")


@dataclass(frozen=True)
class TrajectoryMeta:
    fingerprint: str = ""
    dt: float = 0.0
    method: str = "rk4"


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), M)
    meta: TrajectoryMeta = field(default_factory=TrajectoryMeta)

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float).reshape(-1)
        states = np.asarray(self.states, dtype=float)
        if states.ndim == 1:
            states = states.reshape(len(times), -1) if len(times) else states.reshape(0, 0)
        if states.shape[0] != times.size:
            raise ValueError(f"{times.size} times but {states.shape[0]} states")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("trajectory times must be strictly increasing")
        object.__setattr__(self, "times", readonly(times))
        object.__setattr__(self, "states", readonly(states))

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


# ---------------- Stepping ----------------
def rk4_step(A: np.ndarray, y: np.ndarray, dt: float) -> np.ndarray:
    """One classical Runge-Kutta step for y' = A y."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    k1 = A @ y
    k2 = A @ (y + 0.5 * dt * k1)
    k3 = A @ (y + 0.5 * dt * k2)
    k4 = A @ (y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_transfer_matrix(A: np.ndarray, dt: float) -> np.ndarray:
    """
    For linear autonomous y' = A y one RK4 step is y -> P y with
    P = I + hA + (hA)^2/2 + (hA)^3/6 + (hA)^4/24.
    """
    hA = dt * np.asarray(A, dtype=float)
    eye = np.eye(hA.shape[0])
    # Horner form
    return eye + hA @ (eye + hA @ (eye / 2 + hA @ (eye / 6 + hA / 24)))


def spectral_radius(A: np.ndarray) -> float:
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def stability_ok(A: np.ndarray, dt: float) -> bool:
    return dt * spectral_radius(A) <= RK4_IMAG_STABILITY


def integrate(
    A: np.ndarray,
    y0: np.ndarray,
    t0: float,
    t1: float,
    dt: float,
    *,
    record_every: int = 1,
    fingerprint: str = "",
) -> Trajectory:
    """
    Fixed-step RK4 over [t0, t1]. The last step is shortened to land on t1.
    States are recorded every `record_every` steps; the initial and final
    states are always recorded.
    """
    if not t1 > t0:
        raise ValueError(f"t1 must exceed t0, got t0={t0}, t1={t1}")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if record_every < 1:
        raise ValueError(f"record_every must be >= 1, got {record_every}")

    A = np.asarray(A, dtype=float)
    y = np.asarray(y0, dtype=float).copy()

    rho = spectral_radius(A)
    if dt * rho > RK4_IMAG_STABILITY:
        logger.warning(
            "[integrate] dt*rho=%.3g exceeds RK4 stability limit %.1f (dt=%.3g, rho=%.3g)",
            dt * rho, RK4_IMAG_STABILITY, dt, rho,
        )

    span = t1 - t0
    n_steps = max(1, math.ceil(span / dt - 1e-9))
    n_full = n_steps if abs(n_steps * dt - span) <= 1e-9 * span else n_steps - 1

    P = rk4_transfer_matrix(A, dt)

    times = [t0]
    states = [y.copy()]
    for step in range(1, n_steps + 1):
        if step <= n_full:
            y = P @ y
            t = t0 + step * dt if step < n_steps else t1
        else:
            y = rk4_step(A, y, t1 - (t0 + n_full * dt))
            t = t1

        if not np.all(np.isfinite(y)):
            raise NonFiniteState(step, t)

        if step % record_every == 0 or step == n_steps:
            times.append(t)
            states.append(y.copy())

    logger.debug("[integrate] %d steps, %d samples, dt=%.3g", n_steps, len(times), dt)
    return Trajectory(
        times=np.array(times),
        states=np.array(states),
        meta=TrajectoryMeta(fingerprint=fingerprint, dt=float(dt), method="rk4"),
    )


def exact_propagator(A: np.ndarray, t: float) -> np.ndarray:
    """exp(A t) by scaling-and-squaring with Pade approximation."""
    return expm(np.asarray(A, dtype=float) * t)
