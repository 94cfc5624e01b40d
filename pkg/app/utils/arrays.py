# app/utils/arrays.py
from __future__ import annotations

import numpy as np


def readonly(a: np.ndarray) -> np.ndarray:
    """Copy of `a` with the write flag cleared."""
    out = np.array(a, copy=True)
    out.setflags(write=False)
    return out


def close_to(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    """max|a - b| <= tol * max(1, max|b|); shapes must match."""
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        return False
    if b.size == 0:
        return True
    return float(np.max(np.abs(a - b))) <= tol * max(1.0, float(np.max(np.abs(b))))
