# app/utils/fingerprint.py
from __future__ import annotations

import hashlib

import numpy as np


def array_fingerprint(*arrays: np.ndarray, scalars: tuple[float, ...] = ()) -> str:
    """sha256 over the raw bytes of the arrays (shape and dtype included) and scalars."""
    h = hashlib.sha256()
    for a in arrays:
        a = np.ascontiguousarray(a)
        h.update(str(a.dtype).encode("utf-8"))
        h.update(str(a.shape).encode("utf-8"))
        h.update(a.tobytes())
    for s in scalars:
        h.update(repr(float(s)).encode("utf-8"))
    return h.hexdigest()


def short(fp: str) -> str:
    return fp[:12]
