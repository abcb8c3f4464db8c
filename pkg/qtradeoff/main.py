import json
import sys

import click
import numpy as np
import yaml

from qtradeoff.config import ConfigError, load_config, optimizer_config
from qtradeoff.core.constructions import anticommuting_set, appendix_c_pair, mub_set, random_povm
from qtradeoff.core.formats import (
    IMPLEMENTATIONS,
    matrix_to_json,
    measurements_from_json,
    povm_to_json,
    state_to_json,
)
from qtradeoff.core.measures import DistanceKind, EntropyKind
from qtradeoff.core.optimizer import minimize_average_disturbance, minimize_average_entropy
from qtradeoff.core.qcore import ValidationError
from qtradeoff.core.tradeoffs import qubit_geometry, qubit_pair
from qtradeoff.verifier import (
    DEMOS,
    SUITES,
    SuiteOptions,
    dumps,
    plot_sweep,
    records_frame,
    run_demo,
    run_suite,
    sweep_qubit_theta,
    verification_report,
    write_sweep,
)

GENERATORS = ("mub", "anticommuting", "appendix-c", "qubit-pair", "random-povm")


def _fail(message) -> None:
    click.echo(f"Error: {message}", err=True)
    sys.exit(2)


def _write(text: str, out) -> None:
    """Writes machine output to `out`, or stdout when no path is given."""
    if out is None:
        click.echo(text, nl=False)
        return
    try:
        with open(out, "w") as file:
            file.write(text)
    except OSError as e:
        _fail(f"cannot write {out}: {e}")


def config_option(f):
    return click.option(
        '--config', 'config_path',
        type=click.Path(exists=True, dir_okay=False),
        help='YAML settings file overriding the packaged defaults'
    )(f)


def out_option(f):
    return click.option(
        '--out',
        type=click.Path(dir_okay=False),
        help='Write the output to this file instead of stdout'
    )(f)


@click.group(invoke_without_command=True, context_settings=dict(help_option_names=['-h', '--help']))
@click.pass_context
def cli(ctx):
    """Measurement disturbance and uncertainty tradeoff verifier
    """

    # Show help when no command is given
    if ctx.invoked_subcommand is None:
        click.echo(ctx.get_help())
        ctx.exit()


@cli.command()
@click.argument('suite', type=click.Choice(list(SUITES)))
@click.option('--samples', type=int, help='Random states per check (default: 1000)')
@click.option('--seed', type=int, help='Root RNG seed (default: 42)')
@click.option('--d', 'd', type=int, help='Restrict the mub suite to this prime dimension')
@click.option('--n', 'n', type=int, help='Number of bases or anticommuting observables')
@click.option('--pairs', type=int, help='Random Bloch pairs for the qubit suite (default: 100)')
@click.option('--tol', type=float, help='Tolerance for equality and inequality checks')
@click.option('--restarts', type=int, help='Optimizer restarts for the cross-checks')
@click.option('--workers', type=int, help='Threads running optimizer restarts')
@out_option
@config_option
@click.option('--timings', is_flag=True, help='Include runtime_ms in the JSON report')
@click.option('--quiet', is_flag=True, help='Suppress the summary on stderr')
def verify(suite, samples, seed, d, n, pairs, tol, restarts, workers, out, config_path, timings, quiet):
    """Check the tradeoff relations of a suite; exit 1 if any check fails"""
    try:
        settings = load_config(config_path)
        opts = SuiteOptions.from_settings(settings, tol=tol, restarts=restarts, workers=workers,
                                          samples=samples, seed=seed, pairs=pairs, d=d, n=n)
        if not quiet:
            click.echo(f"Running suite '{suite}' with seed {opts.seed}", err=True)
        records = run_suite(suite, opts)
    except (ValidationError, ConfigError) as e:
        _fail(e)

    report = verification_report(suite, opts, records, timings=timings)
    _write(dumps(report), out)

    failed = [r.name for r in records if not r.passed]
    if not quiet:
        click.echo(f"\n{records_frame(records).to_string(index=False)}\n", err=True)
        if failed:
            click.echo(f"{len(failed)} of {len(records)} checks failed: {', '.join(failed)}", err=True)
        else:
            click.echo(f"All {len(records)} checks passed", err=True)
    sys.exit(1 if failed else 0)


@cli.command()
@click.argument('family', type=click.Choice(['qubit-theta']), default='qubit-theta', required=False)
@click.option('--steps', type=click.IntRange(min=2), help='Number of angles in [0, pi] (default: 181)')
@out_option
@config_option
@click.option('--no-plot', is_flag=True, help='Skip the terminal plot')
@click.option('--quiet', is_flag=True, help='Suppress the summary on stderr')
def sweep(family, steps, out, config_path, no_plot, quiet):
    """Analytic qubit bound against the numeric minimum, as CSV"""
    try:
        settings = load_config(config_path)
        section = settings.get("sweep", {})
        tolerance = settings.get("verify", {}).get("tol_optimizer", 1e-6)
        frame = sweep_qubit_theta(steps or section.get("steps", 181),
                                  tuple(section.get("bloch_grid", (181, 361))),
                                  optimizer_config(settings))
    except (ValidationError, ConfigError) as e:
        _fail(e)

    _write(write_sweep(frame), out)

    worst = float(frame["abs_err"].max())
    if not quiet:
        if not no_plot:
            click.echo("\nAverage fidelity disturbance against theta:", err=True)
            click.echo(plot_sweep(frame), err=True)
        click.echo(f"{len(frame)} angles, max abs error {worst:.3e}", err=True)
    if worst >= tolerance:
        click.echo(f"Sweep error {worst:.3e} exceeds {tolerance:.1e}", err=True)
        sys.exit(1)


@cli.command()
@click.argument('name', type=click.Choice(list(DEMOS)))
@click.option('--seed', type=int, help='RNG seed (default: 42)')
@click.option('--d', 'd', type=int, help='Dimension for the mixed-state demo (default: 3)')
@click.option('--restarts', type=int, help='Optimizer restarts')
@click.option('--workers', type=int, help='Threads running optimizer restarts')
@out_option
@config_option
def demo(name, seed, d, restarts, workers, out, config_path):
    """Run a worked example and print its JSON narrative"""
    try:
        opts = SuiteOptions.from_settings(load_config(config_path), restarts=restarts, workers=workers,
                                          seed=seed, d=d)
        narrative = run_demo(name, opts)
    except (ValidationError, ConfigError) as e:
        _fail(e)
    _write(dumps(narrative), out)
    click.echo(f"Conclusion: {narrative['conclusion']}", err=True)


@cli.command()
@click.argument('input_path', metavar='INPUT', type=click.Path(exists=True, dir_okay=False))
@click.option('--measure', type=click.Choice(['1', 'F', 'inf'], case_sensitive=False),
              help='Minimize the average disturbance under this distance (default: F)')
@click.option('--entropy', help='Minimize the average outcome entropy instead: shannon or tsallis:<beta>')
@click.option('--instrument', type=click.Choice(list(IMPLEMENTATIONS)), default='luders', show_default=True,
              help='How observables and POVMs are implemented; file reads explicit instruments')
@click.option('--seed', type=int, help='Optimizer seed (default: 42)')
@click.option('--restarts', type=int, help='Random restarts (default: 64)')
@click.option('--workers', type=int, help='Threads running restarts (default: 1)')
@out_option
@config_option
def optimize(input_path, measure, entropy, instrument, seed, restarts, workers, out, config_path):
    """Minimize average disturbance or entropy over pure states for a measurement file"""
    if measure and entropy:
        raise click.UsageError("--measure and --entropy are mutually exclusive")
    try:
        with open(input_path, "r") as file:
            data = json.load(file) if input_path.endswith(".json") else yaml.safe_load(file)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        _fail(f"{input_path}: not valid JSON or YAML: {e}")

    try:
        cfg = optimizer_config(load_config(config_path), seed=seed, restarts=restarts, workers=workers)
        instruments, povms = measurements_from_json(data, instrument)
        if entropy:
            kind = EntropyKind.parse(entropy)
            label = kind.label()
            estimate = minimize_average_entropy(kind, povms, cfg)
        else:
            kind = DistanceKind.parse(measure or "F")
            label = f"D_{kind.value}"
            estimate = minimize_average_disturbance(kind, instruments, cfg)
    except (ValidationError, ConfigError) as e:
        _fail(e)

    result = estimate.to_dict()
    result["objective"] = label
    _write(dumps(result), out)
    click.echo(f"min average {label} = {estimate.value:.12g} ({estimate.probes} probes)", err=True)


@cli.command()
@click.argument('kind', type=click.Choice(GENERATORS))
@click.option('--d', 'd', type=int, default=3, show_default=True, help='Dimension (mub, random-povm)')
@click.option('--n', 'n', type=int, help='Number of bases, observables or POVMs')
@click.option('--theta', type=float, default=float(np.pi / 3), show_default=True,
              help='Angle between the Bloch vectors (qubit-pair)')
@click.option('--effects', type=int, default=3, show_default=True, help='Effects per POVM (random-povm)')
@click.option('--seed', type=int, default=42, show_default=True, help='RNG seed (random-povm)')
@out_option
def gen(kind, d, n, theta, effects, seed, out):
    """Emit a construction as JSON, readable by the optimize command"""
    try:
        if kind == "mub":
            family = mub_set(d, n or d + 1)
            payload = {"d": d, "bases": [[state_to_json(v) for v in basis] for basis in family.bases],
                       "povms": [povm_to_json(p) for p in family.povms()]}
        elif kind == "anticommuting":
            aset = anticommuting_set(n or 3)
            payload = {"n": aset.n, "d": aset.dim,
                       "observables": [matrix_to_json(a) for a in aset.observables]}
        elif kind == "appendix-c":
            payload = {"povms": [povm_to_json(p) for p in appendix_c_pair()]}
        elif kind == "qubit-pair":
            a, b = qubit_pair(theta)
            c = qubit_geometry(a, b).c
            payload = {"theta": theta, "c": c, "bound": 0.5 * (1 - c ** 2),
                       "observables": [matrix_to_json(x.matrix()) for x in (a, b)]}
        else:
            rng = np.random.default_rng(seed)
            payload = {"povms": [povm_to_json(random_povm(rng, d, effects)) for _ in range(n or 2)]}
    except ValidationError as e:
        _fail(e)
    _write(dumps(payload), out)


if __name__ == '__main__':
    cli()
