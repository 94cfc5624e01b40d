# tests/conftest.py
from __future__ import annotations

from typing import Callable

import numpy as np
import pytest

from app.models.operator_core import HermitianOperator

SEED = 20240611


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(SEED)


def make_random_hermitian(
    rng: np.random.Generator, n: int, hbar: float = 1.0, cond: float = 3.0
) -> HermitianOperator:
    """
    H = R + iI with R = Q diag(d) Q^T and I a random antisymmetric matrix.

    |d| is log-uniform in [3/cond, 3] with random signs; for n >= 2 both ends
    are hit, so cond(R) equals `cond` exactly.
    """
    if cond < 1.0:
        raise ValueError(f"cond must be >= 1, got {cond}")
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    mags = np.exp(rng.uniform(np.log(3.0 / cond), np.log(3.0), size=n))
    if n >= 2:
        mags[:2] = 3.0 / cond, 3.0
    d = mags * rng.choice([-1.0, 1.0], size=n)
    R = Q @ np.diag(d) @ Q.T
    R = (R + R.T) / 2
    A = rng.normal(scale=0.5, size=(n, n))
    I = (A - A.T) / 2
    return HermitianOperator(R + 1j * I, hbar=hbar)


def make_random_psi(rng: np.random.Generator, n: int) -> np.ndarray:
    psi = rng.normal(size=n) + 1j * rng.normal(size=n)
    return psi / np.linalg.norm(psi)


@pytest.fixture
def random_hermitian(rng) -> Callable[[int], HermitianOperator]:
    return lambda n, hbar=1.0, cond=3.0: make_random_hermitian(rng, n, hbar, cond)


@pytest.fixture
def random_psi(rng) -> Callable[[int], np.ndarray]:
    return lambda n: make_random_psi(rng, n)


@pytest.fixture
def sigma_y() -> np.ndarray:
    return np.array([[0, -1j], [1j, 0]])
