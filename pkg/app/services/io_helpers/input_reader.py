# app/services/io_helpers/input_reader.py
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from app.models.errors import ConfigError


class MatrixFormatError(ConfigError):
    pass


@dataclass(frozen=True, eq=False)
class MatrixFile:
    entries: np.ndarray  # complex dim x dim
    hbar: Optional[float] = None  # None when the file has no hbar header


_HEADER = re.compile(r"^(dim|hbar)\s*[:=]?\s*(\S+)$", re.IGNORECASE)


class InputFileReader:
    """
    Reads the two auxiliary input formats.

    Inline matrix file:
        # comments and blank lines are ignored
        dim 2
        hbar 1.0
        0,0   0,-1
        0,1   0,0
      header keys may be written "dim 2", "dim: 2" or "dim = 2"; each data row
      holds `dim` entries separated by whitespace or ';', each entry "re,im" or "re".

    Potential table:
        two columns x, V separated by whitespace or ','; '#' comments.
    """

    def __init__(self, base_dir: str | Path | None = None) -> None:
        self.base_dir = Path(base_dir) if base_dir else None

    def resolve(self, path: str | Path) -> Path:
        p = Path(path)
        if not p.is_absolute() and self.base_dir is not None:
            p = self.base_dir / p
        return p

    # -------- inline matrix --------
    def read_matrix(self, path: str | Path) -> MatrixFile:
        p = self.resolve(path)
        try:
            text = p.read_text(encoding="utf-8")
        except OSError as e:
            raise MatrixFormatError(f"cannot read matrix file {p}: {e}") from e
        return self.parse_matrix(text)

    def parse_matrix(self, text: str) -> MatrixFile:
        dim: int | None = None
        hbar: Optional[float] = None
        rows: list[list[complex]] = []

        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue

            header = _HEADER.match(line)
            if header:
                key, value = header.group(1).lower(), header.group(2)
                try:
                    if key == "dim":
                        dim = int(value)
                    else:
                        hbar = float(value)
                except ValueError as e:
                    raise MatrixFormatError(f"bad {key} value {value!r}", line=lineno) from e
                if key == "dim" and dim < 1:
                    raise MatrixFormatError(f"dim must be >= 1, got {dim}", line=lineno)
                if key == "hbar" and not (hbar is not None and hbar > 0):
                    raise MatrixFormatError(f"hbar must be positive, got {hbar}", line=lineno)
                continue

            if dim is None:
                raise MatrixFormatError("data row before 'dim' header", line=lineno)

            tokens = [t for t in re.split(r"[\s;]+", line) if t]
            if len(tokens) != dim:
                raise MatrixFormatError(f"expected {dim} entries, found {len(tokens)}", line=lineno)
            rows.append([self._parse_entry(tok, lineno) for tok in tokens])

        if dim is None:
            raise MatrixFormatError("missing 'dim' header")
        if len(rows) != dim:
            raise MatrixFormatError(f"expected {dim} rows, found {len(rows)}")

        return MatrixFile(entries=np.array(rows, dtype=complex), hbar=hbar)

    @staticmethod
    def _parse_entry(token: str, lineno: int) -> complex:
        parts = token.split(",")
        if len(parts) > 2:
            raise MatrixFormatError(f"bad entry {token!r}; expected 're,im'", line=lineno)
        try:
            re_part = float(parts[0])
            im_part = float(parts[1]) if len(parts) == 2 else 0.0
        except ValueError as e:
            raise MatrixFormatError(f"bad entry {token!r}; expected 're,im'", line=lineno) from e
        return complex(re_part, im_part)

    # -------- potential table --------
    def read_potential_table(self, path: str | Path) -> tuple[np.ndarray, np.ndarray]:
        p = self.resolve(path)
        try:
            text = p.read_text(encoding="utf-8")
        except OSError as e:
            raise MatrixFormatError(f"cannot read potential table {p}: {e}") from e

        xs: list[float] = []
        vs: list[float] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = [t for t in re.split(r"[\s,]+", line) if t]
            if len(tokens) != 2:
                raise MatrixFormatError(f"expected 2 columns (x, V), found {len(tokens)}", line=lineno)
            try:
                xs.append(float(tokens[0]))
                vs.append(float(tokens[1]))
            except ValueError as e:
                raise MatrixFormatError(f"non-numeric value in {line!r}", line=lineno) from e

        if not xs:
            raise MatrixFormatError(f"potential table {p} is empty")
        return np.array(xs), np.array(vs)
