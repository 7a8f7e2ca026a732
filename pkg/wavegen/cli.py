"""CLI interface for wavegen using Typer and Rich."""

import io
import json
import logging
import math
from enum import Enum, IntEnum
from pathlib import Path
from typing import List, NoReturn, Optional, Tuple

import numpy as np
import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.progress import Progress, SpinnerColumn, TextColumn
from rich.table import Table

from wavegen.catalog import catalog as reference_catalog
from wavegen.catalog import lookup
from wavegen.config import config
from wavegen.errors import ConfigError, FormatError, TransformError
from wavegen.filterbank import FilterBank, constraint_residuals, derive_bank
from wavegen.formats import (
    Container,
    load_bank,
    load_container,
    preview_plane,
    read_pgm,
    read_signal,
    read_trace,
    save_bank,
    save_container,
    write_pgm,
    write_signal,
    write_trace,
)
from wavegen.solver import SolverConfig, best_result, solve_many
from wavegen.transform import (
    BoundaryMode,
    Decomposition1D,
    SubbandEnergy,
    analyze_1d,
    analyze_2d,
    approximate_samples,
    reconstruction_error,
    subband_energy,
    synthesize_1d,
    synthesize_2d,
)
from wavegen.utils import (
    atomic_write_bytes,
    atomic_write_text,
    format_file_size,
    format_residual,
    resolve_output_path,
)

app = typer.Typer(
    name="wavegen",
    help="Generate, verify and apply orthogonal two-channel filter banks",
    add_completion=False,
)
console = Console()


class ExitStatus(IntEnum):
    """Process exit codes. These values are a stable contract."""

    SUCCESS = 0
    CHECK_FAILED = 1
    USAGE = 2
    IO_ERROR = 3
    NOT_CONVERGED = 4


class ModeChoice(str, Enum):
    """Tokens accepted by --mode. "paper" selects the mirror-extended left edge."""

    periodic = "periodic"
    paper = "paper"

    def to_boundary(self) -> BoundaryMode:
        return BoundaryMode.PERIODIC if self is ModeChoice.periodic else BoundaryMode.MIRROR


def _fail(message: str, status: ExitStatus) -> NoReturn:
    console.print(f"[red]Error:[/red] {escape(message)}")
    raise typer.Exit(int(status))


def _parse_fix(items: List[str]) -> dict[int, float]:
    pinned: dict[int, float] = {}
    for item in items:
        position, sep, value = item.partition("=")
        try:
            if not sep:
                raise ValueError
            pos = int(position)
            pinned_value = float(value)
        except ValueError:
            raise typer.BadParameter(f"expected POS=VALUE, got {item!r}", param_hint="--fix")
        if pos in pinned:
            raise typer.BadParameter(f"position {pos} pinned twice", param_hint="--fix")
        pinned[pos] = pinned_value
    return pinned


def _check_tolerance(tolerance: Optional[float]) -> float:
    limit = config.tolerance if tolerance is None else tolerance
    if not math.isfinite(limit) or limit <= 0:
        raise typer.BadParameter(
            f"must be a finite positive number, got {limit}", param_hint="--tolerance"
        )
    return limit


def _resolve_bank(bank: Optional[Path], ref: Optional[str]) -> FilterBank:
    if (bank is None) == (ref is None):
        raise typer.BadParameter("give exactly one of --bank and --ref")
    if ref is not None:
        try:
            return derive_bank(lookup(ref).taps)
        except KeyError as e:
            _fail(str(e.args[0]), ExitStatus.USAGE)
    try:
        return derive_bank(load_bank(bank).l_d)  # type: ignore[arg-type]
    except (OSError, FormatError) as e:
        _fail(f"cannot read bank: {e}", ExitStatus.IO_ERROR)


def _report_written(path: Path) -> None:
    size = format_file_size(path.stat().st_size)
    console.print(f"[green]✓[/green] Wrote {escape(str(path))} [dim]({size})[/dim]")


@app.command()
def solve(
    n: int = typer.Option(..., "--n", min=1, help="Half-length of the filter (2n taps)"),
    seed: Optional[int] = typer.Option(None, "--seed", min=0, help="Random seed"),
    epsilon: Optional[float] = typer.Option(None, "--epsilon", help="Residual stop threshold"),
    max_sweeps: Optional[int] = typer.Option(None, "--max-sweeps", min=1, help="Sweep cap"),
    fix: Optional[List[str]] = typer.Option(None, "--fix", help="Pin a tap, POS=VALUE (1-based)"),
    restarts: int = typer.Option(1, "--restarts", min=1, help="Seeds to try, keeping the best"),
    out: Path = typer.Option(..., "--out", help="Bank JSON to write"),
    trace: Optional[Path] = typer.Option(None, "--trace", help="Convergence trace CSV to write"),
) -> None:
    """Solve the constraint equations for a new filter bank.

    Runs the coordinate least-squares solver from a seeded random start and
    writes the resulting decomposition low-pass filter as a bank file. The
    other three filters are derived from it whenever the bank is loaded.

    Args:
        n: Half-length of the filter; the bank has 2n taps.
        seed: Seed of the first start. Defaults to WAVEGEN_SEED.
        epsilon: Stop threshold on the total absolute residual. Defaults to
            WAVEGEN_EPSILON.
        max_sweeps: Sweep cap per start. Defaults to WAVEGEN_MAX_SWEEPS.
        fix: Repeated POS=VALUE pins; pinned taps never change and the
            per-sweep normalization is skipped.
        restarts: Number of consecutive seeds to try; the start with the
            smallest residual wins. Runs on WAVEGEN_WORKERS processes.
        out: Destination of the bank JSON.
        trace: Optional destination of the per-sweep trace CSV.

    Raises:
        typer.Exit: 2 on bad flags, 3 on unwritable paths, 4 if the solver
            did not converge (the bank is still written, marked
            converged=false).
    """
    pinned = _parse_fix(fix or [])
    first_seed = config.seed if seed is None else seed
    try:
        configs = [
            SolverConfig(
                n=n,
                epsilon=config.epsilon if epsilon is None else epsilon,
                max_sweeps=config.max_sweeps if max_sweeps is None else max_sweeps,
                seed=first_seed + offset,
                pinned=pinned,
            )
            for offset in range(restarts)
        ]
    except ConfigError as e:
        raise typer.BadParameter(str(e))

    try:
        resolve_output_path(out)
        if trace is not None:
            resolve_output_path(trace)
    except OSError as e:
        _fail(str(e), ExitStatus.IO_ERROR)

    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        console=console,
        transient=True,
    ) as progress:
        task = progress.add_task(f"Solving for {2 * n} taps...", total=None)
        result = best_result(solve_many(configs, workers=config.workers))
        progress.update(task, completed=True)

    try:
        bank_path = save_bank(out, result.filter, converged=result.converged)
        trace_path = write_trace(trace, result.trace) if trace is not None else None
    except OSError as e:
        _fail(str(e), ExitStatus.IO_ERROR)

    console.print(
        f"seed {result.config.seed}: {result.trace.status.value} after "
        f"{result.trace.sweeps_used} sweeps"
    )
    console.print(f"total_abs residual: {format_residual(result.report.total_abs)}")
    _report_written(bank_path)
    if trace_path is not None:
        _report_written(trace_path)
    if not result.converged:
        console.print("[yellow]Solver did not reach epsilon[/yellow]")
        raise typer.Exit(int(ExitStatus.NOT_CONVERGED))


@app.command()
def verify(
    bank: Path = typer.Argument(..., help="Bank JSON to check"),
    tolerance: Optional[float] = typer.Option(
        None, "--tolerance", help="Largest acceptable total_abs residual (default 1e-10)"
    ),
) -> None:
    """Print every equation residual of a bank and check the total.

    Raises:
        typer.Exit: 1 if the total absolute residual exceeds the tolerance,
            2 if the tolerance is not a finite positive number, 3 if the file
            cannot be read or is malformed.
    """
    limit = _check_tolerance(tolerance)
    try:
        bank_file = load_bank(bank)
    except (OSError, FormatError) as e:
        _fail(f"cannot read bank: {e}", ExitStatus.IO_ERROR)

    report = constraint_residuals(bank_file.l_d)
    table = Table(title=f"Residuals of {escape(bank_file.name or bank.name)} (n={report.n})")
    table.add_column("Equation", style="cyan", no_wrap=True)
    table.add_column("Residual", style="green", justify="right", no_wrap=True)
    for label, value in report.listed_equations():
        table.add_row(label, format_residual(value))
    console.print(table)
    console.print(f"total_abs: {format_residual(report.total_abs)} (tolerance {limit:g})")

    if not report.total_abs <= limit:
        console.print("[red]✗[/red] Bank does not satisfy the constraints")
        raise typer.Exit(int(ExitStatus.CHECK_FAILED))
    console.print("[green]✓[/green] Bank satisfies the constraints")


def _signal_energy(d: Decomposition1D) -> SubbandEnergy:
    energies = {"low": float(np.sum(d.p**2)), "high": float(np.sum(d.q**2))}
    total = sum(energies.values())
    fractions = {k: (v / total if total > 0 else 0.0) for k, v in energies.items()}
    return SubbandEnergy(energies=energies, fractions=fractions)


@app.command()
def decompose(
    image: Optional[Path] = typer.Argument(None, help="PGM image (P2 or P5)"),
    signal: Optional[Path] = typer.Option(None, "--signal", help="1D signal CSV, not an image"),
    bank: Optional[Path] = typer.Option(None, "--bank", help="Bank JSON"),
    ref: Optional[str] = typer.Option(None, "--ref", help="Catalog entry name"),
    mode: ModeChoice = typer.Option(ModeChoice.periodic, "--mode", help="Boundary handling"),
    out_prefix: str = typer.Option(..., "--out-prefix", help="Prefix of all output files"),
) -> None:
    """Decompose an image into four subbands, or a signal into two.

    Writes PREFIX.drc (coefficient container) and PREFIX.energy.json. Images
    also get one preview PGM per plane plus PREFIX.previews.json holding the
    offset and scale used for each preview.

    Raises:
        typer.Exit: 2 on conflicting inputs, 3 on unreadable input or
            dimensions that violate the even / at least 4n rule.
    """
    if (image is None) == (signal is None):
        raise typer.BadParameter("give exactly one of IMAGE and --signal")
    filter_bank = _resolve_bank(bank, ref)
    boundary = mode.to_boundary()

    try:
        if signal is not None:
            decomposition_1d = analyze_1d(read_signal(signal), filter_bank, boundary)
            container = Container.from_1d(decomposition_1d, filter_bank.n)
            energy = _signal_energy(decomposition_1d)
        else:
            assert image is not None
            decomposition = analyze_2d(read_pgm(image), filter_bank, boundary)
            container = Container.from_2d(decomposition, filter_bank.n)
            energy = subband_energy(decomposition)
    except (OSError, FormatError, TransformError) as e:
        _fail(str(e), ExitStatus.IO_ERROR)

    document = {"energies": energy.energies, "fractions": energy.fractions, "total": energy.total}
    written = []
    try:
        written.append(save_container(f"{out_prefix}.drc", container))
        if not container.is_1d:
            previews: dict[str, dict[str, float]] = {}
            for name, plane in container.planes.items():
                pixels, offset, scale = preview_plane(plane)
                previews[name] = {"offset": offset, "scale": scale}
                written.append(write_pgm(f"{out_prefix}.{name}.pgm", pixels))
            written.append(
                atomic_write_text(
                    f"{out_prefix}.previews.json", json.dumps(previews, indent=2) + "\n"
                )
            )
        written.append(
            atomic_write_text(f"{out_prefix}.energy.json", json.dumps(document, indent=2) + "\n")
        )
    except OSError as e:
        _fail(str(e), ExitStatus.IO_ERROR)

    table = Table(title="Subband energy")
    table.add_column("Band", style="cyan")
    table.add_column("Energy", style="green", justify="right")
    table.add_column("Fraction", style="magenta", justify="right")
    for name, value in energy.energies.items():
        table.add_row(name, f"{value:.6g}", f"{energy.fractions[name]:.6f}")
    console.print(table)
    for path in written:
        _report_written(path)


@app.command()
def reconstruct(
    container_path: Path = typer.Argument(..., metavar="CONTAINER", help="DRC1 container"),
    bank: Optional[Path] = typer.Option(None, "--bank", help="Bank JSON"),
    ref: Optional[str] = typer.Option(None, "--ref", help="Catalog entry name"),
    reference: Optional[Path] = typer.Option(
        None, "--reference", help="Original image (PGM) or signal (CSV) to compare against"
    ),
    tolerance: Optional[float] = typer.Option(
        None, "--tolerance", help="Largest acceptable reconstruction error (default 1e-10)"
    ),
    out: Path = typer.Option(..., "--out", help="Output PGM, or CSV for a 1D container"),
) -> None:
    """Rebuild an image or signal from a coefficient container.

    With --reference, prints the reconstruction error (the largest absolute
    difference to the original) and fails if it is not below the tolerance.
    The comparison uses the unrounded reconstruction, not the written file.

    Raises:
        typer.Exit: 1 if the error is too large, 2 for a tolerance that is not
            finite and positive, 3 if the container is missing or malformed or
            was built with a different filter length.
    """
    limit = _check_tolerance(tolerance)
    filter_bank = _resolve_bank(bank, ref)
    try:
        container = load_container(container_path)
    except (OSError, FormatError) as e:
        _fail(f"cannot read container: {e}", ExitStatus.IO_ERROR)
    if container.n != filter_bank.n:
        _fail(
            f"container was built with n={container.n} but the bank has n={filter_bank.n}",
            ExitStatus.IO_ERROR,
        )

    try:
        if container.is_1d:
            result = synthesize_1d(container.to_1d(), filter_bank)
            reconstructed = result.samples
            written = write_signal(out, reconstructed)
            if result.approximate.any():
                console.print(
                    f"[yellow]{int(result.approximate.sum())} samples near the right edge "
                    "are approximate in this boundary mode[/yellow]"
                )
        else:
            reconstructed = synthesize_2d(container.to_2d(), filter_bank)
            written = write_pgm(out, reconstructed)
            rows = approximate_samples(container.rows, filter_bank.n, container.mode)
            cols = approximate_samples(container.cols, filter_bank.n, container.mode)
            flagged = int(np.logical_or.outer(rows, cols).sum())
            if flagged:
                console.print(
                    f"[yellow]{flagged} pixels near the bottom and right edges "
                    "are approximate in this boundary mode[/yellow]"
                )
        _report_written(written)
        if reference is None:
            return
        original = read_signal(reference) if container.is_1d else read_pgm(reference)
        delta = reconstruction_error(original, reconstructed)
    except (OSError, FormatError, TransformError) as e:
        _fail(str(e), ExitStatus.IO_ERROR)

    console.print(f"reconstruction error δ = {format_residual(delta)}")
    if not delta < limit:
        console.print(f"[red]✗[/red] δ is not below {limit:g}")
        raise typer.Exit(int(ExitStatus.CHECK_FAILED))
    console.print("[green]✓[/green] Perfect reconstruction")


@app.command()
def catalog(
    export: Optional[Tuple[str, Path]] = typer.Option(
        None, "--export", metavar="NAME PATH", help="Write one entry as a bank JSON"
    ),
) -> None:
    """List the reference filters, or export one of them as a bank file.

    Raises:
        typer.Exit: 2 for an unknown entry name, 3 if the file cannot be written.
    """
    if export is not None:
        name, path = export
        try:
            entry = lookup(name)
        except KeyError as e:
            _fail(str(e.args[0]), ExitStatus.USAGE)
        try:
            _report_written(save_bank(path, entry.taps, name=entry.name))
        except OSError as e:
            _fail(str(e), ExitStatus.IO_ERROR)
        return

    table = Table(title="Reference filters")
    table.add_column("Name", style="cyan", no_wrap=True)
    table.add_column("n", justify="right")
    table.add_column("total_abs", style="green", justify="right", no_wrap=True)
    table.add_column("Tolerance", justify="right", no_wrap=True)
    table.add_column("Source", style="dim")
    for entry in reference_catalog():
        report = constraint_residuals(entry.taps)
        table.add_row(
            entry.name,
            str(entry.taps.n),
            format_residual(report.total_abs),
            f"{entry.tolerance:g}",
            entry.source,
        )
    console.print(table)


@app.command("trace-replot")
def trace_replot(
    trace: Path = typer.Argument(..., help="Trace CSV written by solve --trace"),
    every: int = typer.Option(100, "--every", min=1, help="Show every K-th sweep"),
    out: Optional[Path] = typer.Option(None, "--out", help="Render the curves to an image file"),
) -> None:
    """Summarize a convergence trace and optionally plot it.

    The plot shows the Lyapunov value and the total absolute residual per
    sweep on a log scale. The image format follows the file suffix.

    Raises:
        typer.Exit: 3 if the trace cannot be read or the plot cannot be written.
    """
    try:
        records = read_trace(trace)
    except (OSError, FormatError) as e:
        _fail(f"cannot read trace: {e}", ExitStatus.IO_ERROR)
    if not records:
        _fail("trace has no records", ExitStatus.IO_ERROR)

    table = Table(title=f"Convergence of {escape(trace.name)}")
    table.add_column("Sweep", justify="right", style="cyan")
    table.add_column("Lyapunov", justify="right", style="green", no_wrap=True)
    table.add_column("total_abs", justify="right", style="magenta", no_wrap=True)
    shown = [r for r in records if r.sweep % every == 0 or r.sweep == 1]
    if shown[-1:] != records[-1:]:
        shown.append(records[-1])
    for record in shown:
        table.add_row(
            str(record.sweep), format_residual(record.lyapunov), format_residual(record.total_abs)
        )
    console.print(table)

    if out is None:
        return
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    sweeps = [r.sweep for r in records]
    floor = np.finfo(np.float64).tiny
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.semilogy(sweeps, [max(r.lyapunov, floor) for r in records], label="Lyapunov")
    ax.semilogy(sweeps, [max(r.total_abs, floor) for r in records], label="total_abs residual")
    ax.set_xlabel("sweep")
    ax.legend()
    fig.tight_layout()
    buffer = io.BytesIO()
    try:
        fig.savefig(buffer, format=out.suffix.lstrip(".") or "png")
        _report_written(atomic_write_bytes(out, buffer.getvalue()))
    except (OSError, ValueError) as e:
        _fail(f"cannot write plot: {e}", ExitStatus.IO_ERROR)
    finally:
        plt.close(fig)


def _configure_logging(level: str) -> None:
    logger = logging.getLogger("wavegen")
    if not any(isinstance(h, RichHandler) for h in logger.handlers):
        logger.addHandler(RichHandler(console=Console(stderr=True), show_path=False))
    logger.setLevel(level)


@app.callback(invoke_without_command=True)
def main(
    ctx: typer.Context,
    version: bool = typer.Option(False, "--version", help="Show version and exit"),
    verbose: bool = typer.Option(False, "--verbose", help="Log solver and transform details"),
) -> None:
    """wavegen - orthogonal filter-bank synthesis and subband transforms.

    Args:
        ctx: Typer context object containing invocation information.
        version: If True, displays the application version and exits.
        verbose: If True, logs at DEBUG level regardless of WAVEGEN_LOG_LEVEL.

    Raises:
        typer.Exit: 0 after --version or the usage summary, 2 if the
            environment configuration is invalid.
    """
    try:
        config.validate()
    except ValueError as e:
        _fail(str(e), ExitStatus.USAGE)
    _configure_logging("DEBUG" if verbose else config.log_level)

    if version:
        from wavegen import __version__

        console.print(f"wavegen version {__version__}")
        raise typer.Exit()

    if ctx.invoked_subcommand is None:
        console.print("[bold blue]wavegen[/bold blue] - orthogonal filter-bank toolkit")
        console.print("\nUse [cyan]wavegen --help[/cyan] to see available commands.")
        console.print("\nExample commands:")
        console.print("  [cyan]wavegen solve --n 4 --seed 7 --out bank.json --trace t.csv[/cyan]")
        console.print("  [cyan]wavegen verify bank.json[/cyan]")
        console.print("  [cyan]wavegen decompose photo.pgm --ref db3 --out-prefix photo[/cyan]")
        console.print("  [cyan]wavegen reconstruct photo.drc --ref db3 --out back.pgm[/cyan]")


if __name__ == "__main__":
    app()
