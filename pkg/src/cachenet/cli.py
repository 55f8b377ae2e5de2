"""
Command-line interface: simulate, theory, compare and oracle.

Exit codes: 0 success, 1 invalid input, 2 runtime failure. Failures print a
single stderr line `error:<kind>:<message>`.
"""

from dataclasses import asdict
from datetime import datetime, timezone
from functools import wraps
from typing import Any, Dict, List, Optional

import click
import numpy as np
from marshmallow import ValidationError

from . import __version__, create_app
from .exceptions import CsvFormatError
from .network_logic.comparison import compare_records, plot_series
from .network_logic.oracle_suites import run_oracle_suites
from .network_logic.simulator import sweep_cluster_sizes
from .network_logic.theory import (
    TradeoffCurve, achievable_curve, baseline_throughputs, outer_bound_curve, regime_classify,
)
from .schemas import RunManifest, RunManifestSchema
from .utils.config_manager import load_simulation_plan, load_theory_request
from .utils.csv_io import (
    ORACLE_COLUMNS, SIMULATE_COLUMNS, SUMMARY_COLUMNS, THEORY_COLUMNS, curve_rows, format_rows,
    read_curve_records, sweep_rows, write_rows,
)
from .utils.svg_plot import render_tradeoff_svg

EXIT_VALIDATION = 1
EXIT_RUNTIME = 2

DEFAULT_P_GRID = np.linspace(0.01, 1.0, 100)


def _one_line(text: str) -> str:
    return ' '.join(str(text).split())


def _validation_message(error: ValidationError) -> str:
    messages = error.messages
    if isinstance(messages, dict):
        return '; '.join(f"{key}: {_one_line(value)}" for key, value in sorted(messages.items()))
    return _one_line(messages)


def handle_cli_errors(func):
    """Map failures to the exit-code contract and log them on the error channel"""
    @wraps(func)
    def wrapper(*args, **kwargs):
        app = click.get_current_context().obj
        try:
            return func(*args, **kwargs)
        except (click.exceptions.Exit, click.ClickException, click.Abort):
            raise
        except ValidationError as e:
            kind, message, code = 'validation', _validation_message(e), EXIT_VALIDATION
        except (CsvFormatError, ValueError) as e:
            kind, message, code = 'validation', _one_line(e), EXIT_VALIDATION
        except Exception as e:
            kind, message, code = 'runtime', _one_line(f"{type(e).__name__}: {e}"), EXIT_RUNTIME

        app.sim_logger.log_event('command_failed', {'command': func.__name__, 'kind': kind,
                                                    'message': message}, level='error')
        click.echo(f"error:{kind}:{message}", err=True)
        click.get_current_context().exit(code)

    return wrapper


def _emit(columns, rows, out: Optional[str], digits: int):
    if out is None or out == '-':
        click.echo(format_rows(columns, rows, digits), nl=False)
        return
    write_rows(out, columns, rows, digits)


def _write_manifest(out: Optional[str], command: str, config: Dict[str, Any], started_at: datetime,
                    seed: Optional[int] = None, outputs: Optional[List[str]] = None):
    if out is None or out == '-':
        return
    manifest = RunManifest(
        command=command,
        tool_version=__version__,
        config=config,
        started_at=started_at,
        finished_at=datetime.now(timezone.utc),
        seed=seed,
        outputs=outputs or [out],
    )
    with open(f'{out}.manifest.json', 'w', encoding='utf-8') as handle:
        handle.write(RunManifestSchema().dumps(manifest, indent=2, sort_keys=True))
        handle.write('\n')


@click.group()
@click.version_option(__version__, prog_name='cachenet')
@click.pass_context
def cli(ctx):
    """Throughput-outage tradeoff of D2D caching networks."""
    if ctx.obj is None:
        ctx.obj = create_app()


@cli.command()
@click.option('--config', 'config_file', type=click.Path(exists=True, dir_okay=False),
              help='key=value file; flags override its values')
@click.option('--n', type=int, help='number of nodes (perfect square)')
@click.option('--m', type=int, help='library size')
@click.option('--gamma-r', 'gamma_r', type=float, multiple=True, help='Zipf request exponent (repeatable)')
@click.option('--g-c', 'g_c', type=int, multiple=True, help='cluster size (repeatable for sweeps)')
@click.option('--delta', type=float, help='protocol-model interference parameter')
@click.option('--K', 'k_override', type=int, help='reuse factor override')
@click.option('--C', 'link_rate', type=float, help='link rate in bits/s/Hz')
@click.option('--trials', type=int)
@click.option('--seed', type=int, help='master seed (required)')
@click.option('--caching', help='optimal | uniform | zipf:<gamma_c>')
@click.option('--allow-self-hit/--no-allow-self-hit', 'allow_self_hit', default=None)
@click.option('--workers', type=int, help='parallel worker processes; results do not depend on it')
@click.option('--chunk-size', 'chunk_size', type=int)
@click.option('--out', type=click.Path(dir_okay=False), help='output CSV (default stdout)')
@click.pass_obj
@handle_cli_errors
def simulate(app, config_file, out, **flags):
    """Monte Carlo estimate of (outage, min throughput) per cluster size."""
    started_at = datetime.now(timezone.utc)
    app.sim_logger.start_run('simulate')
    plan = load_simulation_plan(config_file, flags, app.config)

    rows = []
    for base in plan.bases:
        rows.extend(sweep_rows(sweep_cluster_sizes(base, plan.g_c_list)))

    _emit(SIMULATE_COLUMNS, rows, out, app.config.FLOAT_DIGITS)
    _write_manifest(out, 'simulate',
                    {'runs': [base.to_dict() for base in plan.bases], 'g_c': plan.g_c_list},
                    started_at, seed=plan.bases[0].seed)


@cli.command()
@click.option('--config', 'config_file', type=click.Path(exists=True, dir_okay=False))
@click.option('--n', type=int)
@click.option('--m', type=int)
@click.option('--gamma-r', 'gamma_r', type=float, multiple=True)
@click.option('--K', 'k_override', type=int, help='reuse factor (default from Delta)')
@click.option('--C', 'link_rate', type=float)
@click.option('--delta', type=float)
@click.option('--g-c', 'g_c', type=float, multiple=True, help='cluster sizes traced on case 2')
@click.option('--g-r', 'g_r', type=float, multiple=True, help='g_R values traced on the outer bound')
@click.option('--p-grid', 'p_grid', help="comma-separated outages; '' for none")
@click.option('--rho1', type=float)
@click.option('--rho2', type=float)
@click.option('--rho3', type=float)
@click.option('--sources', help='comma-separated subset of achievable,outer,baselines')
@click.option('--out', type=click.Path(dir_okay=False))
@click.pass_obj
@handle_cli_errors
def theory(app, config_file, out, **flags):
    """Dominant-term achievable curve, outer bound and baselines."""
    started_at = datetime.now(timezone.utc)
    app.sim_logger.start_run('theory')
    request = load_theory_request(config_file, flags, app.config)
    p_grid = list(DEFAULT_P_GRID) if request.p_grid is None else request.p_grid
    evaluated = bool(p_grid or request.g_c_grid or request.g_r_grid)

    rows = []
    for params in request.params:
        report = regime_classify(params.n, params.m, params.gamma_r, params.eps_small)
        app.sim_logger.log_event('regime', {'gamma_r': params.gamma_r, 'regime': report.regime.value,
                                            'ratio': report.ratio, 'threshold': report.threshold})
        curve = TradeoffCurve()
        if 'achievable' in request.sources:
            curve = curve.merged(achievable_curve(params, p_grid=p_grid, g_c_grid=request.g_c_grid))
        if 'outer' in request.sources:
            curve = curve.merged(outer_bound_curve(params, p_grid=p_grid, g_r_grid=request.g_r_grid))
        if 'baselines' in request.sources and evaluated:
            curve = curve.merged(baseline_throughputs(params.n, params.m, params.C).curve())
        rows.extend(curve_rows(curve, params))

    _emit(THEORY_COLUMNS, rows, out, app.config.FLOAT_DIGITS)
    _write_manifest(out, 'theory', {'params': [asdict(p) for p in request.params],
                                    'p_grid': [float(p) for p in p_grid],
                                    'g_c': request.g_c_grid, 'g_r': request.g_r_grid,
                                    'sources': request.sources}, started_at)


@cli.command()
@click.argument('first_csv', type=click.Path(exists=True, dir_okay=False))
@click.argument('second_csv', type=click.Path(exists=True, dir_okay=False))
@click.option('--svg', 'svg_path', type=click.Path(dir_okay=False), default='tradeoff.svg', show_default=True)
@click.option('--out', type=click.Path(dir_okay=False), help='summary CSV (default stdout)')
@click.pass_obj
@handle_cli_errors
def compare(app, first_csv, second_csv, svg_path, out):
    """Relative error of FIRST_CSV (simulated) against SECOND_CSV (theory) at matched p."""
    started_at = datetime.now(timezone.utc)
    app.sim_logger.start_run('compare')
    first = read_curve_records(first_csv)
    second = read_curve_records(second_csv)
    rows = compare_records(first, second)

    with open(svg_path, 'w', encoding='utf-8') as handle:
        handle.write(render_tradeoff_svg(plot_series(first, second), title='normalized throughput vs outage'))

    app.sim_logger.log_event('comparison', {'points': len(rows),
                                            'max_rel_error': max(r.rel_error for r in rows)})
    _emit(SUMMARY_COLUMNS, [r.as_row() for r in rows], out, app.config.FLOAT_DIGITS)
    _write_manifest(out, 'compare', {'first': first_csv, 'second': second_csv}, started_at,
                    outputs=[out, svg_path])


@cli.command()
@click.option('--resolution', type=click.Choice(['0.01', '0.02', '0.05']), default=None,
              help='simplex grid step of the caching oracle')
@click.option('--trials', type=int, default=20000, show_default=True, help='Monte Carlo trials of the enumeration suite')
@click.option('--seed', type=int, default=2024, show_default=True)
@click.option('--out', type=click.Path(dir_okay=False))
@click.pass_obj
@handle_cli_errors
def oracle(app, resolution, trials, seed, out):
    """Brute-force checks: caching optimality, enumeration, schedule soundness."""
    started_at = datetime.now(timezone.utc)
    app.sim_logger.start_run('oracle')
    resolution = float(resolution) if resolution else app.config.ORACLE_RESOLUTION
    results = run_oracle_suites(resolution=resolution, trials=trials, seed=seed)

    _emit(ORACLE_COLUMNS, [r.as_row() for r in results], out, app.config.FLOAT_DIGITS)
    _write_manifest(out, 'oracle', {'resolution': resolution, 'trials': trials}, started_at, seed=seed)
