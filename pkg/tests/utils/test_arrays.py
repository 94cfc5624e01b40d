from __future__ import annotations

import numpy as np
import pytest

from app.models.hamiltonian_dynamics import build_phase_generator
from app.models.operator_core import HermitianOperator, split
from app.utils.arrays import close_to, readonly


def test_readonly_copies_and_freezes():
    a = np.arange(4.0)
    frozen = readonly(a)
    a[0] = 9.0
    assert frozen[0] == 0.0
    with pytest.raises(ValueError):
        frozen[1] = 5.0


def test_model_arrays_are_readonly():
    gen = build_phase_generator(split(HermitianOperator(np.diag([1.0, 2.0]))))
    assert not gen.matrix.flags.writeable


@pytest.mark.parametrize(
    "a, b, tol, expected",
    [
        (np.ones(3), np.ones(3), 0.0, True),
        (np.array([1.0 + 1e-11]), np.array([1.0]), 1e-10, True),
        (np.array([1.0 + 1e-9]), np.array([1.0]), 1e-10, False),
        (np.array([1000.0 + 1e-8]), np.array([1000.0]), 1e-10, True),
        (np.ones(2), np.ones(3), 1.0, False),
        (np.zeros((0, 2)), np.zeros((0, 2)), 0.0, True),
    ],
)
def test_close_to(a, b, tol, expected):
    assert close_to(a, b, tol) is expected
