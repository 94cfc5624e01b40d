# app/services/io_helpers/output_writer.py
from __future__ import annotations

import csv
import logging
from pathlib import Path
from typing import Literal

from pydantic import BaseModel

from app.models.errors import LagrangeError
from app.models.integrators import Trajectory

logger = logging.getLogger(__name__)

TrajectoryKind = Literal["phase", "lagrangian"]


class OutputError(LagrangeError, OSError):
    pass


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def trajectory_header(dim: int, kind: TrajectoryKind) -> list[str]:
    second = "p" if kind == "phase" else "qdot"
    return ["t"] + [f"q_{i}" for i in range(1, dim + 1)] + [f"{second}_{i}" for i in range(1, dim + 1)]


class RunOutputWriter:
    """
    Writes run artifacts under one output directory:
      - trajectories as CSV (17 significant digits, '\\n' line endings)
      - reports as indented JSON with fixed key names
    """

    def __init__(self, out_dir: str | Path) -> None:
        self.out_dir = Path(out_dir)

    def _ensure_dir(self) -> None:
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise OutputError(f"cannot create output directory {self.out_dir}: {e}") from e

    def emit_trajectory(
        self, traj: Trajectory, filename: str, kind: TrajectoryKind = "phase", dim: int | None = None
    ) -> Path:
        self._ensure_dir()
        path = self.out_dir / filename
        if dim is None:
            dim = traj.states.shape[1] // 2 if traj.states.ndim == 2 and traj.states.shape[1] else 0

        try:
            with path.open("w", newline="", encoding="utf-8") as f:
                w = csv.writer(f, lineterminator="\n")
                w.writerow(trajectory_header(dim, kind))
                for t, y in zip(traj.times, traj.states):
                    w.writerow([_fmt(t)] + [_fmt(v) for v in y])
        except OSError as e:
            raise OutputError(f"cannot write trajectory {path}: {e}") from e

        logger.info("[output] %s (%d rows)", path, len(traj))
        return path

    def write_report(self, report: BaseModel, filename: str) -> Path:
        self._ensure_dir()
        path = self.out_dir / filename
        try:
            path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
        except OSError as e:
            raise OutputError(f"cannot write report {path}: {e}") from e

        logger.info("[output] %s", path)
        return path
