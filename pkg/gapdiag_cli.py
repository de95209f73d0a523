#!/usr/bin/env python3
"""
gapdiag - block diagonalization of operators with a spectral gap

Command-line front end: load an operator model, run one pipeline stage, print
a rich summary and write a JSON (single run) or CSV (sweep) report.

Exit status: 0 when every requested check passes, 1 when a check fails
(the report carries the failure list), 2 on input or parse errors.
"""

import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import typer
from rich import box
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

from angular import (
    ReferenceProjections,
    accretivity_witnesses,
    angular_from_projections,
    block_diagonalize,
    direct_rotation,
    direct_rotation_report,
    rotation_from_omega,
    verify_norm_bound,
    w_accretivity,
)
from config import AppConfig, get_config
from dirac import (
    CoulombConstants,
    build_demo_operator,
    fw_rotation_residual,
    magnetic_threshold,
    radial_grid,
    threshold_inequality,
    upper_lower_distance,
    z_threshold,
)
from dkh_series import CSV_HEADER, CouplingFamily, convergence_report, format_gamma
from errors import GapdiagError, InputError
from exporters import ReportExporter, default_report_path, failure_list
from form_perturbation import GappedOperator, form_perturbation
from matrix_core import (
    ProjectionPair,
    dagger,
    hermitian_part,
    load_model,
    matrix_from_json,
    operator_norm,
    random_complex,
    read_json,
    schur_split,
)
from riesz_projector import QuadratureScheme, riesz_split, split_report, verify_decay
from verification import run_property_sweep

console = Console()
logger = logging.getLogger("gapdiag")

REFERENCE_MODEL = Path(__file__).resolve().parent / "models" / "reference_8x8.json"

BOX_STYLES = {'rounded': box.ROUNDED, 'simple': box.SIMPLE, 'heavy': box.HEAVY}

app = typer.Typer(
    name="gapdiag",
    help="Spectral-gap block diagonalization toolkit",
    add_completion=False,
)


def setup_logging(debug: bool):
    """Route library logging through rich"""
    logging.basicConfig(
        level=logging.DEBUG if debug else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def load_settings(tol: Optional[float] = None, quad_nodes: Optional[int] = None,
                  quad_radius: Optional[float] = None, alpha: Optional[float] = None,
                  debug: bool = False) -> AppConfig:
    """Configured defaults with per-run flag overrides"""
    config = get_config().with_overrides(
        tolerances={'oracle': tol},
        quadrature={'initial_nodes': quad_nodes, 'radius': quad_radius},
        dirac={'alpha': alpha},
    )
    setup_logging(debug or config.ui.show_debug)
    ok, message = config.validate()
    if not ok:
        raise InputError(message, "cli", "run-config")
    return config


def read_operator(path: Optional[Path]) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """(H0, V) from a model file, or (H, None) from a bare matrix file"""
    path = path or REFERENCE_MODEL
    obj = read_json(path)
    if isinstance(obj, dict) and 'h0' in obj:
        return load_model(path)
    return matrix_from_json(obj), None


def load_operator(path: Optional[Path]) -> Tuple[GappedOperator, np.ndarray]:
    """(base, V) from a model file; a bare matrix file is read as H0 with V = 0"""
    h0, v = read_operator(path)
    return GappedOperator.from_matrix(h0), (np.zeros_like(h0) if v is None else v)


def parse_gamma(text: str) -> complex:
    try:
        return complex(text.replace(' ', ''))
    except ValueError as e:
        raise InputError(f"invalid coupling {text!r}", "cli", "gamma-format") from e


def write_report(config: AppConfig, command: str, report: Dict[str, Any],
                 output: Optional[Path], seed: Optional[int] = None) -> Path:
    path = output or default_report_path(config.reports_path, command, "json", seed)
    if not ReportExporter.save_to_json(report, path, config.output.json_indent):
        raise InputError(f"cannot write report {path}", "cli", "report-write")
    return path


def summary_table(title: str, rows: Dict[str, Any], config: AppConfig) -> Table:
    table = Table(title=title, box=BOX_STYLES.get(config.ui.table_style, box.ROUNDED))
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", style="white")
    for key, value in rows.items():
        if isinstance(value, float):
            value = f"{value:.6g}"
        table.add_row(key, str(value))
    return table


def run_command(command: str, body: Callable[[], Tuple[Dict[str, Any], bool]],
                config_factory: Callable[[], AppConfig], output: Optional[Path],
                seed: Optional[int] = None):
    """Run a command body and map its outcome to report files and exit codes"""
    try:
        config = config_factory()
    except GapdiagError as e:
        console.print(f"[red]✗ {e}[/red]")
        raise typer.Exit(2)

    try:
        report, passed = body()
    except InputError as e:
        console.print(f"[red]✗ Input error: {e}[/red]")
        raise typer.Exit(2)
    except GapdiagError as e:
        report = {'command': command, 'pass': False, 'failures': failure_list([e])}
        passed = False

    report.setdefault('command', command)
    report['pass'] = bool(passed)
    report.setdefault('failures', [])
    try:
        path = write_report(config, command, report, output, seed)
    except InputError as e:
        console.print(f"[red]✗ {e}[/red]")
        raise typer.Exit(2)

    if passed:
        console.print(f"[green]✓ {command} passed[/green] [dim]({path})[/dim]")
        return
    for failure in report['failures']:
        console.print(f"[red]✗ [{failure['module']}:{failure['invariant']}] {failure['message']}[/red]")
    raise typer.Exit(1)


@app.command()
def rho(
    input: Optional[Path] = typer.Option(None, "--input", "-i", help="Model file {h0, v}"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Report path"),
    debug: bool = typer.Option(False, "--debug", help="Verbose logging"),
):
    """Relative form-bound data (a, b, rho_full, rho_half) of V"""
    holder: Dict[str, AppConfig] = {}

    def settings():
        holder['config'] = load_settings(debug=debug)
        return holder['config']

    def body():
        base, v = load_operator(input)
        pert = form_perturbation(base, v)
        summary = pert.to_summary()
        summary['delta'] = base.delta
        summary['symmetric'] = pert.symmetric
        console.print(summary_table("Form Perturbation", summary, holder['config']))
        failures = []
        if pert.rho_half > pert.rho_full * (1 + 1e-12):
            failures.append({'module': 'form_perturbation', 'invariant': 'rho-order',
                             'message': 'rho_half exceeds rho_full'})
        return {'summary': summary, 'failures': failures}, not failures

    run_command("rho", body, settings, output)


@app.command()
def split(
    input: Optional[Path] = typer.Option(None, "--input", "-i", help="Matrix file or model file"),
    gamma: str = typer.Option("1", "--gamma", "-g", help="Coupling for model files (complex allowed)"),
    quad_nodes: Optional[int] = typer.Option(None, "--quad-nodes", help="Initial quadrature nodes"),
    quad_radius: Optional[float] = typer.Option(None, "--quad-radius", help="Quadrature radius R"),
    tol: Optional[float] = typer.Option(None, "--tol", help="Oracle distance tolerance"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Report path"),
    debug: bool = typer.Option(False, "--debug", help="Verbose logging"),
):
    """Spectral splitting by imaginary-axis quadrature, checked against the Schur oracle"""
    holder: Dict[str, AppConfig] = {}

    def settings():
        holder['config'] = load_settings(tol, quad_nodes, quad_radius, debug=debug)
        return holder['config']

    def body():
        config = holder['config']
        h0, v = read_operator(input)
        h = h0 if v is None else h0 + parse_gamma(gamma) * v
        scheme = QuadratureScheme.for_matrix(h, config.quadrature.initial_nodes, config.quadrature.radius)
        with console.status("[bold green]Integrating the resolvent..."):
            pair = riesz_split(h, scheme, max_nodes=config.quadrature.max_nodes,
                               tol=config.tolerances.convergence,
                               axis_margin=config.quadrature.axis_margin,
                               projector_tol=config.tolerances.projector)
        report = split_report(h, pair)
        console.print(summary_table("Riesz Split", report, config))
        failures = []
        if report['oracle_distance'] > config.tolerances.oracle:
            failures.append({'module': 'riesz_projector', 'invariant': 'oracle-equivalence',
                             'message': f"oracle distance {report['oracle_distance']:.3e}"})
        return {'split': report, 'failures': failures}, not failures

    run_command("split", body, settings, output)


def _coupled(base: GappedOperator, v: np.ndarray, gamma: complex):
    pert = form_perturbation(base, v)
    h = base.h0 + gamma * v
    hermitian = pert.symmetric and gamma.imag == 0.0
    return pert, h, hermitian


@app.command()
def angular(
    input: Optional[Path] = typer.Option(None, "--input", "-i", help="Model file {h0, v}"),
    gamma: str = typer.Option("1", "--gamma", "-g", help="Coupling (complex allowed)"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Report path"),
    debug: bool = typer.Option(False, "--debug", help="Verbose logging"),
):
    """Angular operators of H0 + gamma V with norm bounds and accretivity witnesses"""
    holder: Dict[str, AppConfig] = {}

    def settings():
        holder['config'] = load_settings(debug=debug)
        return holder['config']

    def body():
        base, v = load_operator(input)
        g = parse_gamma(gamma)
        pert, h, hermitian = _coupled(base, v, g)
        q = schur_split(h)
        if hermitian:
            q = ProjectionPair.from_plus(hermitian_part(q.q_plus), h, method="schur")
        p = ProjectionPair(base.p_plus, base.p_minus, method="eigh")
        x = angular_from_projections(q, ReferenceProjections.from_pair(p))
        rho_half, rho_full = abs(g) * pert.rho_half, abs(g) * pert.rho_full

        bound = verify_norm_bound(rho_half, 0.0, hermitian, x, rho_full=rho_full)
        blocks = block_diagonalize(h, x)
        witnesses = {}
        failures = list(bound.failures)
        for name, mu_plus, mu_minus in accretivity_witnesses(rho_half, hermitian):
            result = w_accretivity(h, mu_plus, mu_minus, p, x,
                                   margin=holder['config'].tolerances.accretivity_margin)
            witnesses[name] = result.to_dict()
            if not result.passed:
                failures.append({'module': 'angular', 'invariant': 'accretivity-witness',
                                 'message': f"{name} not certified"})
        report = {
            'norm_bound': bound.to_dict(),
            'offdiag_residual': blocks.offdiag_residual,
            'witnesses': witnesses,
            'failures': failures,
        }
        console.print(summary_table("Angular Operators", bound.to_dict(), holder['config']))
        return report, not failures

    run_command("angular", body, settings, output)


@app.command()
def rotate(
    input: Optional[Path] = typer.Option(None, "--input", "-i", help="Model file {h0, v}"),
    gamma: float = typer.Option(1.0, "--gamma", "-g", help="Real coupling"),
    order: Optional[int] = typer.Option(None, "--order", help="Truncate the Omega series after this power"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Report path"),
    debug: bool = typer.Option(False, "--debug", help="Verbose logging"),
):
    """Direct rotation from the spectral subspaces of H0 onto those of H0 + gamma V"""
    holder: Dict[str, AppConfig] = {}

    def settings():
        holder['config'] = load_settings(debug=debug)
        return holder['config']

    def body():
        if order is not None and order < 0:
            raise InputError("--order must be nonnegative", "cli", "series-order")
        base, v = load_operator(input)
        pert, h, hermitian = _coupled(base, v, complex(gamma))
        if not hermitian:
            raise InputError("rotation needs a symmetric V", "cli", "symmetric-v")
        q = ProjectionPair.from_plus(hermitian_part(schur_split(h).q_plus), h, method="schur")
        p = ProjectionPair(base.p_plus, base.p_minus, method="eigh")
        series_tol = holder['config'].tolerances.omega_series
        rotation = direct_rotation_report(q, p, series_tol)
        x = angular_from_projections(q, ReferenceProjections.from_pair(p))
        report = rotation.to_dict()
        report['distance'] = operator_norm(q.q_plus - p.q_plus)
        report['series_order'] = order
        report['series_error'] = None
        if rotation.cross_checked:
            report['series_error'] = operator_norm(rotation_from_omega(x, series_tol, order) - rotation.u)
        console.print(summary_table("Direct Rotation", report, holder['config']))
        failures = []
        if order is None and rotation.cross_checked and report['series_error'] > 1e-9:
            failures.append({'module': 'angular', 'invariant': 'rotation-routes',
                             'message': f"Omega assembly differs from U by {report['series_error']:.3e}"})
        report['failures'] = failures
        return report, not failures

    run_command("rotate", body, settings, output)


@app.command()
def dkh(
    input: Optional[Path] = typer.Option(None, "--input", "-i", help="Model file {h0, v}"),
    gamma: List[float] = typer.Option([0.3], "--gamma", "-g", help="Coupling(s); repeat for a sweep"),
    nmax: int = typer.Option(8, "--nmax", "-n", help="Highest truncation order"),
    symmetric: bool = typer.Option(False, "--symmetric/--similarity",
                                   help="Truncate the unitary (symmetric) family instead of W"),
    quad_nodes: Optional[int] = typer.Option(None, "--quad-nodes", help="Initial quadrature nodes"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="CSV report path"),
    debug: bool = typer.Option(False, "--debug", help="Verbose logging"),
):
    """DKH truncations H_diag^N and their norm-resolvent errors (CSV)"""
    holder: Dict[str, AppConfig] = {}

    def settings():
        holder['config'] = load_settings(quad_nodes=quad_nodes, debug=debug)
        return holder['config']

    def body():
        config = holder['config']
        if nmax < 0:
            raise InputError("--nmax must be nonnegative", "cli", "nmax")
        base, v = load_operator(input)
        pert = form_perturbation(base, v)
        family = CouplingFamily(base, pert, config.dkh, config.quadrature)
        with console.status("[bold green]Sampling the coupling family..."):
            table = convergence_report(base, pert, gamma, nmax, symmetric=symmetric, family=family)
        csv_path = output or default_report_path(config.reports_path, "dkh", "csv")
        if not ReportExporter.save_text(table.to_csv(config.output.csv_delimiter), csv_path):
            raise InputError(f"cannot write {csv_path}", "cli", "report-write")

        view = Table(title=f"DKH convergence (gamma_max ~ {table.gamma_max:.4g})",
                     box=BOX_STYLES.get(config.ui.table_style, box.ROUNDED))
        for column in CSV_HEADER:
            view.add_column(column)
        for row in table.rows:
            view.add_row(format_gamma(row.gamma), str(row.order),
                         "-" if row.resolvent_error is None else f"{row.resolvent_error:.3e}",
                         "-" if row.ratio_estimate is None else f"{row.ratio_estimate:.3f}")
        console.print(view)

        failures = table.failures
        report = {'csv': str(csv_path), 'gamma_max': table.gamma_max,
                  'sample_radius': table.sample_radius,
                  'singularity_radius': table.singularity_radius,
                  'decay_rates': [check.to_dict() for check in table.rate_checks],
                  'failures': failures}
        return report, not failures

    json_path = Path(output).with_suffix(".json") if output is not None else None
    run_command("dkh", body, settings, json_path)


@app.command()
def verify(
    seed: int = typer.Option(0, "--seed", "-s", help="Random seed"),
    count: int = typer.Option(20, "--count", "-c", help="Number of random instances"),
    max_dim: int = typer.Option(12, "--max-dim", help="Largest instance dimension"),
    tol: Optional[float] = typer.Option(None, "--tol", help="Oracle distance tolerance"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Report path"),
    debug: bool = typer.Option(False, "--debug", help="Verbose logging"),
):
    """Seeded property sweep over random gapped instances"""
    holder: Dict[str, AppConfig] = {}

    def settings():
        holder['config'] = load_settings(tol, debug=debug)
        return holder['config']

    def body():
        config = holder['config']
        if count < 1 or max_dim < 4:
            raise InputError("--count must be positive and --max-dim at least 4", "cli", "sweep-size")
        with console.status(f"[bold green]Checking {count} instances..."):
            sweep = run_property_sweep(seed, count, max_dim=max_dim,
                                       oracle_tol=config.tolerances.oracle)
        report = sweep.to_dict()
        view = Table(title=f"Property sweep (seed {seed})",
                     box=BOX_STYLES.get(config.ui.table_style, box.ROUNDED))
        for column in ("check", "checked", "skipped", "violations", "worst"):
            view.add_column(column)
        for name, tally in sorted(sweep.tallies.items()):
            view.add_row(name, str(tally.checked), str(tally.skipped),
                         str(tally.violations), f"{tally.worst:.3e}")
        console.print(view)
        return report, sweep.passed

    run_command("verify", body, settings, output, seed)


@app.command("dirac-threshold")
def dirac_threshold(
    mode: str = typer.Option("exact", "--mode", "-m", help="exact, dkh or magnetic"),
    alpha: Optional[float] = typer.Option(None, "--alpha", help="Fine-structure constant"),
    delta_b: float = typer.Option(1.0, "--delta-b", help="Magnetic constant delta(B) in (0, 1]"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Report path"),
    debug: bool = typer.Option(False, "--debug", help="Verbose logging"),
):
    """Largest nuclear charge Z admitted by the Coulomb conditions"""
    holder: Dict[str, AppConfig] = {}

    def settings():
        holder['config'] = load_settings(alpha=alpha, debug=debug)
        return holder['config']

    def body():
        constants = CoulombConstants(alpha=holder['config'].dirac.alpha,
                                     guard_band=holder['config'].dirac.guard_band)
        if mode == "magnetic":
            z = magnetic_threshold(delta_b, constants)
        else:
            z = z_threshold(mode, constants)
        inequality = threshold_inequality(mode, constants, delta_b)
        console.print(Panel(f"[bold]{z}[/bold]\n[dim]{inequality}[/dim]",
                            title=f"Z threshold ({mode})", border_style="blue"))
        return {'mode': mode, 'z': z, 'alpha': constants.alpha, 'inequality': inequality}, True

    run_command("dirac-threshold", body, settings, output)


@app.command()
def demo(
    seed: int = typer.Option(0, "--seed", "-s", help="Random seed for the coupling"),
    points: int = typer.Option(16, "--points", help="Momentum grid points"),
    strength: float = typer.Option(0.4, "--strength", help="Operator norm of V"),
    nmax: int = typer.Option(4, "--nmax", "-n", help="Highest truncation order"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Report path"),
    debug: bool = typer.Option(False, "--debug", help="Verbose logging"),
):
    """End-to-end run on a discretized free Dirac operator with a coupling potential"""
    holder: Dict[str, AppConfig] = {}

    def settings():
        holder['config'] = load_settings(debug=debug)
        return holder['config']

    def body():
        if points < 1 or not 0 <= strength < 1:
            raise InputError("--points must be positive and --strength in [0, 1)", "cli", "demo-size")
        rng = np.random.default_rng(seed)
        grid = radial_grid(10.0, points)
        coupling = hermitian_part(random_complex(rng, 4 * points, 4 * points))
        if strength > 0:
            coupling *= strength / operator_norm(coupling)
        else:
            coupling *= 0.0
        base, pert = build_demo_operator(grid, coupling)
        h = base.h0 + pert.v

        pair = riesz_split(h)
        split = split_report(h, pair)
        q = ProjectionPair.from_plus(hermitian_part(pair.q_plus), h, method="riesz")
        p = ProjectionPair(base.p_plus, base.p_minus, method="eigh")
        x = angular_from_projections(q, ReferenceProjections.from_pair(p))
        bound = verify_norm_bound(pert.rho_half, 0.0, True, x)
        u = direct_rotation(q, p)
        decay = verify_decay(base, pert, 1.0, (1.0, 10.0, 100.0))
        family = CouplingFamily(base, pert, holder['config'].dkh, holder['config'].quadrature)
        table = convergence_report(base, pert, [0.5 * family.sample_radius()], nmax, family=family)
        distances = upper_lower_distance(radial_grid(1e3, 100))
        fw_residual = max(fw_rotation_residual(m) for m in grid)

        failures = list(bound.failures) + list(distances.failures)
        if split['oracle_distance'] > holder['config'].tolerances.oracle:
            failures.append({'module': 'riesz_projector', 'invariant': 'oracle-equivalence',
                             'message': f"oracle distance {split['oracle_distance']:.3e}"})
        if not decay.passed:
            failures.append({'module': 'riesz_projector', 'invariant': 'resolvent-decay',
                             'message': f"max ratio {decay.max_ratio:.6g}"})
        if fw_residual > 1e-10:
            failures.append({'module': 'dirac', 'invariant': 'fw-rotation',
                             'message': f"direct rotation differs from u(p)* by {fw_residual:.3e}"})
        failures.extend(table.failures)

        summary = {
            'dimension': base.dim,
            'rho_full': pert.rho_full,
            'rho_half': pert.rho_half,
            'oracle_distance': split['oracle_distance'],
            'norm_x_plus': bound.norm_x_plus,
            'norm_bound': bound.bound,
            'rotation_unitarity': operator_norm(dagger(u) @ u - np.eye(base.dim)),
            'decay_max_ratio': decay.max_ratio,
            'fw_rotation_residual': fw_residual,
            'upper_lower_sup': distances.supremum,
            'gamma_max': table.gamma_max,
        }
        console.print(summary_table("Dirac Demo", summary, holder['config']))
        errors = {str(row.order): row.resolvent_error for row in table.rows}
        return {'summary': summary, 'dkh_errors': errors, 'failures': failures}, not failures

    run_command("demo", body, settings, output, seed)


if __name__ == "__main__":
    app()
