#!/usr/bin/env python3
"""
Main CLI interface for the B3/C3 orbit-function transform toolkit.
"""

import sys
import traceback
from pathlib import Path

import click

from data_models import (
    AlgebraName, BumpSpec, ErrorMethod, FieldDataError, GridFamily, IntegrationMethod, RunConfig, SliceComponent
)
from agents.model_agent import DISPUTED_REFERENCES, REFERENCE_M_VALUES
from agents.orchestrator_agent import OrchestratorAgent
from agents.verification_agent import ROUNDTRIP_TOLERANCE, SUITE_NAMES

ALGEBRAS = click.Choice([a.value for a in AlgebraName])
FAMILIES = click.Choice([f.value for f in GridFamily])
COMPONENTS = click.Choice([c.value for c in SliceComponent])
SUITES = click.Choice(list(SUITE_NAMES))
INTEGRATIONS = click.Choice([m.value for m in IntegrationMethod])

# RunConfig field -> option name used by the subcommands
CONFIG_OPTIONS = {
    "algebra": "algebra",
    "family": "family",
    "M": "M",
    "seed": "seed",
    "mc_samples": "mc_samples",
    "input_path": "input_path",
    "output_path": "output",
    "tolerance": "tolerance",
}


def _config_defaults(config: RunConfig) -> dict:
    """Per-subcommand default_map built from a RunConfig."""
    values = {}
    for field, option in CONFIG_OPTIONS.items():
        value = getattr(config, field)
        if value is not None:
            values[option] = getattr(value, "value", value)
    defaults = {}
    for name, command in cli.commands.items():
        if config.command and config.command != name:
            continue
        params = {p.name: p for p in command.params}
        defaults[name] = {
            option: ([value] if params[option].multiple else value)
            for option, value in values.items() if option in params
        }
    return defaults


@click.group()
@click.option('--verbose', '-v', is_flag=True, help='Enable verbose output')
@click.option('--threads', type=click.IntRange(min=1), envvar='ORBIT_THREADS', help='Maximum worker threads')
@click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False),
              help='YAML file with RunConfig defaults')
@click.pass_context
def cli(ctx, verbose, threads, config_path):
    """
    Orbit-function transforms for B3 and C3

    Discrete Ss/Sl transforms on the grids F_M, interpolation of sampled
    functions, verification suites and the bump interpolation experiments.

    Examples:

        # Enumerate a grid
        python main.py grid --algebra B3 --family s --M 10 --output grid.csv

        # Run every verification suite up to M = 8
        python main.py verify --max-M 8

        # Reproduce the C3 short-grid experiment
        python main.py experiment --preset f1 --output f1.json
    """
    ctx.ensure_object(dict)
    if config_path:
        try:
            config = OrchestratorAgent.load_config(config_path)
        except FieldDataError as e:
            click.echo(f"❌ {e}", err=True)
            sys.exit(3)
        ctx.default_map = _config_defaults(config)
        threads = threads or config.threads
    ctx.obj.update({"verbose": verbose, "threads": threads})


def _orchestrator(ctx, corrupt_epsilon: bool = False) -> OrchestratorAgent:
    return OrchestratorAgent(verbose=ctx.obj["verbose"], threads=ctx.obj["threads"], corrupt_epsilon=corrupt_epsilon)


def _run(ctx, action):
    """Run one workflow with the usual interrupt/unexpected-error handling."""
    try:
        return action()
    except KeyboardInterrupt:
        click.echo("\n⚠️  Process interrupted by user", err=True)
        sys.exit(1)
    except Exception as e:
        click.echo(f"❌ Unexpected error: {e}", err=True)
        if ctx.obj["verbose"]:
            traceback.print_exc()
        sys.exit(1)


def _finish(result, verbose: bool) -> None:
    if result["success"]:
        return
    _display_error_result(result, verbose)
    sys.exit(result["exit_code"])


def _write_report(orchestrator: OrchestratorAgent, report_path) -> None:
    if not report_path:
        return
    try:
        Path(report_path).write_text(orchestrator.generate_workflow_report() + "\n", encoding='utf-8')
        click.echo(f"📊 Workflow report saved to: {report_path}")
    except OSError as e:
        click.echo(f"⚠️  Failed to save report: {e}", err=True)


def _bump_from_options(alpha, beta, center):
    if center is None or len(center) == 0:
        return None
    try:
        return BumpSpec(alpha=alpha, beta=beta, center=tuple(center))
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--alpha/--beta/--center")


# ----------------------------------------------------------------------
# grid / weights
# ----------------------------------------------------------------------

def _grid_options(func):
    func = click.option('--format', 'fmt', type=click.Choice(['csv', 'json']),
                        help='Output format (default: from the file suffix)')(func)
    func = click.option('--output', '-o', type=click.Path(dir_okay=False), help='Output CSV or JSON file')(func)
    func = click.option('--M', 'M', type=click.IntRange(min=1), required=True, help='Grid parameter M')(func)
    func = click.option('--family', type=FAMILIES, required=True, help='s (short) or l (long)')(func)
    func = click.option('--algebra', type=ALGEBRAS, required=True, help='Root system')(func)
    return func


@cli.command()
@_grid_options
@click.pass_context
def grid(ctx, algebra, family, M, output, fmt):
    """Enumerate the point grid F_M."""
    orchestrator = _orchestrator(ctx)
    result = _run(ctx, lambda: orchestrator.run_grid(algebra, family, M, output, fmt))
    _finish(result, ctx.obj["verbose"])
    _display_grid_result(result, algebra, family, M)


@cli.command()
@_grid_options
@click.pass_context
def weights(ctx, algebra, family, M, output, fmt):
    """Enumerate the weight set Lambda_M."""
    orchestrator = _orchestrator(ctx)
    result = _run(ctx, lambda: orchestrator.run_grid(algebra, family, M, output, fmt, weights=True))
    _finish(result, ctx.obj["verbose"])
    _display_grid_result(result, algebra, family, M)


# ----------------------------------------------------------------------
# transform / interpolate
# ----------------------------------------------------------------------

@cli.command()
@click.option('--input', 'input_path', type=click.Path(exists=True, dir_okay=False), required=True,
              help='Sampled field (or spectral field with --inverse), JSON or CSV')
@click.option('--output', '-o', type=click.Path(dir_okay=False), help='Output JSON or CSV file')
@click.option('--inverse', is_flag=True, help='Evaluate a spectral field on its grid')
@click.option('--verify-roundtrip', is_flag=True, help='Report the max reconstruction residual')
@click.option('--tolerance', type=float, default=ROUNDTRIP_TOLERANCE, show_default=True,
              help='Round-trip tolerance')
@click.option('--algebra', type=ALGEBRAS, help='Root system (CSV input only)')
@click.option('--family', type=FAMILIES, help='Grid family (CSV input only)')
@click.option('--M', 'M', type=click.IntRange(min=1), help='Grid parameter (CSV input only)')
@click.pass_context
def transform(ctx, input_path, output, inverse, verify_roundtrip, tolerance, algebra, family, M):
    """Forward (or inverse) discrete transform of a field on F_M."""
    orchestrator = _orchestrator(ctx)
    click.echo(f"🔍 Reading field: {input_path}")
    result = _run(ctx, lambda: orchestrator.run_transform(
        input_path, output, inverse, verify_roundtrip, tolerance, algebra, family, M
    ))
    if result.get("roundtrip_residual") is not None:
        click.echo(f"   • Round-trip residual: {result['roundtrip_residual']:.3e}")
    _finish(result, ctx.obj["verbose"])

    field = result["field"]
    click.echo(f"\n✅ {field.kind.title()} field with {result['count']} values "
               f"({field.algebra.value} {field.family.value} M={field.M})")
    if output:
        click.echo(f"📁 Saved to: {output}")


@cli.command()
@click.option('--spectral', 'spectral_path', type=click.Path(exists=True, dir_okay=False), required=True,
              help='Spectral field JSON')
@click.option('--points', 'points_path', type=click.Path(exists=True, dir_okay=False), required=True,
              help='CSV file with one point per row')
@click.option('--coordinates', type=click.Choice(['orthonormal', 'alphavee']), default='orthonormal',
              show_default=True, help='Coordinates used in the points file')
@click.option('--output', '-o', type=click.Path(dir_okay=False), help='Output CSV file')
@click.pass_context
def interpolate(ctx, spectral_path, points_path, coordinates, output):
    """Evaluate a stored interpolant at arbitrary points."""
    orchestrator = _orchestrator(ctx)
    result = _run(ctx, lambda: orchestrator.run_interpolate(spectral_path, points_path, output, coordinates))
    _finish(result, ctx.obj["verbose"])
    click.echo(f"\n✅ Interpolant evaluated at {result['count']} points")
    if output:
        click.echo(f"📁 Saved to: {output}")
    elif result["count"] <= 20:
        for row in result["rows"]:
            click.echo("   " + ", ".join(format(v, '.17g') for v in row))


# ----------------------------------------------------------------------
# verify
# ----------------------------------------------------------------------

@cli.command()
@click.option('--max-M', 'max_M', type=click.IntRange(min=1), default=8, show_default=True,
              help='Largest M used by the grid-based suites')
@click.option('--suite', 'suites', type=SUITES, multiple=True, help='Run only these suites (repeatable)')
@click.option('--seed', type=int, default=0, show_default=True, help='Random seed')
@click.option('--mc-samples', type=click.IntRange(min=1), default=1_000_000, show_default=True,
              help='Samples for Monte Carlo integrals')
@click.option('--integration', type=INTEGRATIONS,
              help='Continuous suite integrator (default: quadrature, monte_carlo when --mc-samples is given)')
@click.option('--corrupt-epsilon', is_flag=True, help='Perturb the epsilon table (negative control)')
@click.option('--report', 'report_path', type=click.Path(dir_okay=False), help='Write a markdown workflow report')
@click.pass_context
def verify(ctx, max_M, suites, seed, mc_samples, integration, corrupt_epsilon, report_path):
    """Run the verification suites; exit 1 on the first failing suite."""
    if integration is None:
        explicit = ctx.get_parameter_source("mc_samples") == click.core.ParameterSource.COMMANDLINE
        integration = IntegrationMethod.MONTE_CARLO.value if explicit else IntegrationMethod.QUADRATURE.value
    orchestrator = _orchestrator(ctx, corrupt_epsilon=corrupt_epsilon)
    click.echo(f"🔍 Running {len(suites) or 'all'} suite(s) with M <= {max_M}")
    result = _run(ctx, lambda: orchestrator.run_verify(list(suites) or None, max_M, seed, mc_samples, integration))
    for suite in result.get("suites", []):
        mark = "✅" if suite.passed else "❌"
        click.echo(f"   {mark} {suite.suite:<17} {suite.checks:>7} checks   max deviation {suite.max_deviation:.3e}")
    _write_report(orchestrator, report_path)
    _finish(result, ctx.obj["verbose"])
    click.echo("\n✅ All suites passed")


# ----------------------------------------------------------------------
# experiment / slice
# ----------------------------------------------------------------------

@cli.command()
@click.option('--preset', type=click.Choice(['f1', 'f2']),
              help='Preset bump experiment: f1 (C3 short grid) or f2 (B3 long grid)')
@click.option('--paper-f1', 'preset_f1', is_flag=True, help='Same as --preset f1')
@click.option('--paper-f2', 'preset_f2', is_flag=True, help='Same as --preset f2')
@click.option('--algebra', type=ALGEBRAS, help='Root system of a custom experiment')
@click.option('--family', type=FAMILIES, help='Grid family of a custom experiment')
@click.option('--alpha', type=float, default=1 / 20, show_default=True, help='Inner radius of the bump')
@click.option('--beta', type=float, default=1 / 9, show_default=True, help='Outer radius of the bump')
@click.option('--center', type=float, nargs=3, default=None, help='Bump center, orthonormal coordinates')
@click.option('--M', 'M', type=click.IntRange(min=2), multiple=True, help='Grid parameters (default 8 16 24 32 40)')
@click.option('--error-method', type=click.Choice([m.value for m in ErrorMethod]), default='spectral',
              show_default=True, help='How the L2 error is evaluated')
@click.option('--mc-samples', type=click.IntRange(min=1), default=1_000_000, show_default=True,
              help='Samples for the Monte Carlo error')
@click.option('--seed', type=int, default=0, show_default=True, help='Random seed')
@click.option('--output', '-o', type=click.Path(dir_okay=False), help='Experiment report JSON')
@click.option('--slices-dir', type=click.Path(file_okay=False), help='Directory for slice CSV matrices')
@click.option('--slice-axis', type=click.IntRange(0, 2), default=2, show_default=True, help='Fixed coordinate')
@click.option('--slice-value', type=float, help='Value of the fixed coordinate (default: bump center)')
@click.option('--resolution', type=click.IntRange(min=2), default=128, show_default=True, help='Slice resolution')
@click.option('--component', type=COMPONENTS, default='real', show_default=True, help='Exported component')
@click.option('--timing', is_flag=True, help='Record runtime_ms in the report')
@click.option('--report', 'report_path', type=click.Path(dir_okay=False), help='Write a markdown workflow report')
@click.pass_context
def experiment(ctx, preset, preset_f1, preset_f2, algebra, family, alpha, beta, center, M, error_method, mc_samples,
               seed, output, slices_dir, slice_axis, slice_value, resolution, component, timing, report_path):
    """Interpolate a smooth bump on F_M and report the L2 errors."""
    chosen = {name for name, flag in (("f1", preset_f1), ("f2", preset_f2)) if flag} | ({preset} if preset else set())
    if len(chosen) > 1:
        raise click.UsageError("choose a single preset experiment")
    preset = chosen.pop() if chosen else None
    bump = _bump_from_options(alpha, beta, center)
    if not preset and (algebra is None or family is None or bump is None):
        raise click.UsageError("give --preset, or --algebra, --family and --center")

    orchestrator = _orchestrator(ctx)
    M_values = list(M) or list(REFERENCE_M_VALUES)
    click.echo(f"🔍 Running experiment {preset or 'custom'} for M = {', '.join(map(str, M_values))}")
    result = _run(ctx, lambda: orchestrator.run_experiment(
        preset, algebra, family, bump, M_values, error_method, mc_samples, seed, timing,
        output, slices_dir, slice_axis, slice_value, resolution, component,
    ))
    _finish(result, ctx.obj["verbose"])
    _display_experiment_result(result)
    if output:
        click.echo(f"\n📁 Report saved to: {output}")
    if slices_dir:
        click.echo(f"📁 Slices saved to: {slices_dir}")
    _write_report(orchestrator, report_path)


@cli.command(name='slice')
@click.option('--spectral', 'spectral_path', type=click.Path(exists=True, dir_okay=False),
              help='Spectral field JSON to slice')
@click.option('--algebra', type=ALGEBRAS, help='Root system when slicing the bump model')
@click.option('--alpha', type=float, default=1 / 20, show_default=True, help='Inner radius of the bump')
@click.option('--beta', type=float, default=1 / 9, show_default=True, help='Outer radius of the bump')
@click.option('--center', type=float, nargs=3, default=None, help='Bump center, orthonormal coordinates')
@click.option('--axis', type=click.IntRange(0, 2), default=2, show_default=True, help='Fixed coordinate')
@click.option('--value', type=float, required=True, help='Value of the fixed coordinate')
@click.option('--resolution', type=click.IntRange(min=2), default=128, show_default=True, help='Samples per axis')
@click.option('--component', type=COMPONENTS, default='real', show_default=True, help='Exported component')
@click.option('--output', '-o', type=click.Path(dir_okay=False), required=True, help='Output CSV matrix')
@click.pass_context
def slice_command(ctx, spectral_path, algebra, alpha, beta, center, axis, value, resolution, component, output):
    """Export a plane section of an interpolant or of the bump model."""
    bump = _bump_from_options(alpha, beta, center)
    if not spectral_path and (algebra is None or bump is None):
        raise click.UsageError("give --spectral, or --algebra with --center")
    orchestrator = _orchestrator(ctx)
    result = _run(ctx, lambda: orchestrator.run_slice(
        axis, value, output, spectral_path, algebra, bump, resolution, component
    ))
    _finish(result, ctx.obj["verbose"])
    rows, columns = result["shape"]
    click.echo(f"\n✅ Slice x{axis + 1} = {value} with {rows}x{columns} samples")
    click.echo(f"📁 Saved to: {output}")


# ----------------------------------------------------------------------
# Display helpers
# ----------------------------------------------------------------------

def _display_grid_result(result, algebra, family, M):
    """Display grid enumeration results."""
    noun = "weights" if result["kind"] == "weights" else "grid points"
    click.echo(f"✅ {result['count']} {noun} ({algebra} {family} M={M})")
    if result.get("output_path"):
        click.echo(f"📁 Saved to: {result['output_path']}")


def _display_experiment_result(result):
    """Display the L2 errors, with reference values when a preset was run."""
    reference = result.get("reference") or {}
    click.echo("\n✅ Experiment finished")
    click.echo("📊 L2 errors:")
    for report in result["reports"]:
        line = f"   • M={report.M:>3}: {report.error_l2:.6e} ({report.error_method.value})"
        if report.M in reference:
            line += f"   reference {reference[report.M]:.4e}, ratio {report.error_l2 / reference[report.M]:.3f}"
            if (result["document"]["preset"], report.M) in DISPUTED_REFERENCES:
                line += " (disputed reference)"
        click.echo(line)


def _display_error_result(result, verbose):
    """Display error results."""
    click.echo(f"\n❌ Command failed!", err=True)
    click.echo(f"🔍 Error type: {result['error_type']}", err=True)

    if 'error_message' in result:
        click.echo(f"💬 Error message: {result['error_message']}", err=True)

    if verbose and "workflow_state" in result:
        click.echo(f"\n🔄 Workflow state: {result['workflow_state']['current_step']}", err=True)
        click.echo(f"⏱️  Execution time: {result['execution_time_seconds']:.2f}s", err=True)


if __name__ == "__main__":
    cli()
