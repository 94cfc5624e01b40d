# app/console/lagrange_cli.py
from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

import typer
from dotenv import load_dotenv
from rich.console import Console
from rich.markup import escape

from app.config import get_settings
from app.models.errors import LagrangeError
from app.models.schemas import RunConfig
from app.services.config_loader import load_config
from app.services.equivalence_runner import EquivalenceRunner, check_thresholds
from app.services.io_helpers.input_reader import InputFileReader
from app.services.io_helpers.output_writer import RunOutputWriter
from app.utils.logging_setup import configure_logging

load_dotenv()

logger = logging.getLogger(__name__)
console = Console(stderr=True)

EXIT_OK = 0
EXIT_THRESHOLD = 1
EXIT_ERROR = 2

app = typer.Typer(
    name="lagrange",
    help="Schrodinger vs Lagrangian-form equivalence runs.",
    no_args_is_help=True,
    add_completion=False,
)

ConfigOpt = typer.Option(..., "--config", "-c", exists=True, dir_okay=False, readable=True, help="YAML run config")
OutOpt = typer.Option(None, "--out", "-o", help="Output directory (default: LAGRANGE_OUTPUT_DIR)")
TolOpt = typer.Option(None, "--tol", min=0.0, help="Relative invertibility tolerance")


@app.callback()
def _setup(
    log_level: Optional[str] = typer.Option(None, "--log-level", help="DEBUG, INFO, WARNING, ..."),
) -> None:
    configure_logging(log_level or get_settings().log_level)


def _runner(config: Path, tol: Optional[float]) -> tuple[EquivalenceRunner, RunConfig]:
    cfg = load_config(config)
    return EquivalenceRunner(reader=InputFileReader(config.parent), tol=tol), cfg


def _fail(e: LagrangeError) -> typer.Exit:
    console.print(f"[red]error:[/red] {escape(str(e))}", markup=True, highlight=False)
    return typer.Exit(EXIT_ERROR)


def _run_to_dir(config: Path, out_dir: Path, tol: Optional[float]) -> tuple[int, str]:
    runner, cfg = _runner(config, tol)
    report = runner.execute(cfg, out_dir)

    failures = check_thresholds(report, cfg.thresholds)
    if failures:
        return EXIT_THRESHOLD, "; ".join(failures)
    if report.singularity is not None and not report.singularity.invertible:
        return EXIT_OK, "singular real part (no trajectories)"
    return EXIT_OK, f"max_state_deviation={report.max_state_deviation:.3e}"


# ---------------- Commands ----------------
@app.command()
def run(config: Path = ConfigOpt, out: Optional[Path] = OutOpt, tol: Optional[float] = TolOpt) -> None:
    """Evolve both formulations and write the configured outputs."""
    out_dir = out or Path(get_settings().output_dir)
    try:
        code, summary = _run_to_dir(config, out_dir, tol)
    except LagrangeError as e:
        raise _fail(e) from e

    if code == EXIT_THRESHOLD:
        console.print(f"[yellow]threshold failed:[/yellow] {escape(summary)}")
    else:
        console.print(f"[green]\\[run][/green] {escape(summary)} -> {out_dir}")
    raise typer.Exit(code)


@app.command()
def spectrum(config: Path = ConfigOpt, out: Optional[Path] = OutOpt, tol: Optional[float] = TolOpt) -> None:
    """Sorted spectra of the phase-space generator and the Lagrangian embedding."""
    try:
        runner, cfg = _runner(config, tol)
        report = runner.run_spectrum_report(cfg)
        if out is not None:
            RunOutputWriter(out).write_report(report, "spectrum_report.json")
    except LagrangeError as e:
        raise _fail(e) from e

    typer.echo(report.model_dump_json(indent=2))

    limit = cfg.thresholds.spectrum_mismatch if cfg.thresholds else None
    if limit is not None and (report.mismatch is None or report.mismatch > limit):
        raise typer.Exit(EXIT_THRESHOLD)


@app.command("check-singularity")
def check_singularity(config: Path = ConfigOpt, tol: Optional[float] = TolOpt) -> None:
    """Invertibility report for the real part; exit 1 when singular."""
    try:
        runner, cfg = _runner(config, tol)
        report = runner.check_singularity(cfg)
    except LagrangeError as e:
        raise _fail(e) from e

    typer.echo(report.model_dump_json(indent=2))
    raise typer.Exit(EXIT_OK if report.invertible else EXIT_THRESHOLD)


@app.command("kg-dispersion")
def kg_dispersion(
    config: Path = ConfigOpt,
    mode: Optional[int] = typer.Option(None, "--mode", min=0, help="Standing-wave mode index"),
) -> None:
    """Measured vs theoretical angular frequency of one Klein-Gordon mode."""
    try:
        runner, cfg = _runner(config, None)
        report = runner.run_kg_dispersion(cfg, mode)
    except LagrangeError as e:
        raise _fail(e) from e

    typer.echo(report.model_dump_json(indent=2))

    limit = cfg.thresholds.dispersion_rel if cfg.thresholds else None
    if limit is not None and report.relative_error_omega_sq > limit:
        raise typer.Exit(EXIT_THRESHOLD)


def _batch_worker(config: str, out_dir: str, tol: Optional[float], log_level: str) -> tuple[str, int, str]:
    configure_logging(log_level)
    try:
        code, summary = _run_to_dir(Path(config), Path(out_dir), tol)
    except LagrangeError as e:
        return config, EXIT_ERROR, str(e)
    return config, code, summary


@app.command()
def batch(
    configs: list[Path] = typer.Argument(..., exists=True, dir_okay=False, readable=True),
    out: Path = typer.Option(..., "--out", "-o", help="Parent directory; one subdirectory per config"),
    workers: int = typer.Option(2, "--workers", "-w", min=1),
    tol: Optional[float] = TolOpt,
) -> None:
    """Run several configs in parallel, each in its own output subdirectory."""
    stems = [c.stem for c in configs]
    if len(set(stems)) != len(stems):
        console.print("[red]error:[/red] config file names must be distinct")
        raise typer.Exit(EXIT_ERROR)

    level = get_settings().log_level
    results: list[tuple[str, int, str]] = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_batch_worker, str(c), str(out / c.stem), tol, level) for c in configs]
        for f in futures:
            results.append(f.result())

    for path, code, summary in results:
        tag = {EXIT_OK: "[green]ok[/green]", EXIT_THRESHOLD: "[yellow]threshold[/yellow]"}.get(code, "[red]error[/red]")
        console.print(f"{tag} {escape(path)}: {escape(summary)}")

    typer.echo(json.dumps({path: code for path, code, _ in results}, indent=2))
    raise typer.Exit(max(code for _, code, _ in results))


def main() -> None:
    app()


if __name__ == "__main__":
    main()
