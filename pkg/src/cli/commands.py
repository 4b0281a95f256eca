"""
Command-line surface: run, verify, spectrum and cases.
"""
import functools
import logging
import sys

import click
import yaml

from src.app import create_app
from src.application.use_cases.compute_spectrum import ComputeSpectrumRequest
from src.application.use_cases.run_simulation import RunSimulationRequest
from src.application.use_cases.verify_case import VerifyCaseRequest
from src.cli.schemas import CASE_NAMES, PRESETS, build_run_config, load_run_config, parse_run_file
from src.domain.services.cases import case_table
from src.middlewares.error_handler import EXIT_INVARIANT, ErrorHandler

logger = logging.getLogger(__name__)


def handled(command):
    """Map domain exceptions to exit codes and a one-paragraph message."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except click.exceptions.Exit:
            raise
        except Exception as e:  # noqa: BLE001
            message, _ = ErrorHandler.resolve(e)
            code = ErrorHandler.handle(e)
            click.echo(message, err=True)
            sys.exit(code)

    return wrapper


@click.group()
@click.option("--env", default=None, help="Settings class: development, production or testing.")
@click.pass_context
def cli(ctx, env):
    """Structure-preserving viscoresistive MHD on spline de Rham complexes."""
    ctx.obj = create_app(env)


@cli.command()
@click.argument("config_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--restart", type=click.Path(exists=True, dir_okay=False),
              help="Continue from this snapshot.")
@click.option("--output-dir", default=None, help="Override output.dir of the run file.")
@click.pass_obj
@handled
def run(app, config_file, restart, output_dir):
    """Integrate the case described by CONFIG_FILE."""
    config = load_run_config(config_file, defaults=app.config)
    if output_dir:
        config = config.with_changes(output_dir=output_dir)
    response = app.run_simulation().execute(RunSimulationRequest(config, restart))
    click.echo(f"{response.message}; outputs in {response.output_dir}")


@cli.command()
@click.argument("case", type=click.Choice(CASE_NAMES))
@click.option("--preset", type=click.Choice(PRESETS), default="desk", show_default=True)
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False),
              help="Run file whose values override the preset.")
@click.option("--output-dir", default=None)
@click.pass_obj
@handled
def verify(app, case, preset, config_file, output_dir):
    """Run CASE and check its acceptance properties."""
    data = parse_run_file(config_file) if config_file else {}
    data.update({"case": case, "preset": data.get("preset", preset)})
    config = build_run_config(data, defaults=app.config)
    if output_dir:
        config = config.with_changes(output_dir=output_dir)
    response = app.verify_case().execute(VerifyCaseRequest(config))
    click.echo(response.table())
    if not response.passed:
        click.echo(f"{response.case}: FAILED", err=True)
        sys.exit(EXIT_INVARIANT)
    click.echo(f"{response.case}: passed")


@cli.command()
@click.argument("run_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--window", nargs=2, type=float, default=None,
              help="Growth-fit window (t0 t1) for tearing runs.")
@click.pass_obj
@handled
def spectrum(app, run_dir, window):
    """Spectra (dispersion runs) or growth rates (tearing runs) of RUN_DIR."""
    response = app.compute_spectrum().execute(ComputeSpectrumRequest(run_dir, window or None))
    for path in response.files:
        click.echo(str(path))


@cli.command()
@click.option("--format", "fmt", type=click.Choice(["text", "yaml"]), default="text", show_default=True)
def cases(fmt):
    """List the cases with published and desk parameters."""
    table = case_table()
    if fmt == "yaml":
        click.echo(yaml.safe_dump(table, sort_keys=False))
        return
    for entry in table:
        published, desk = entry["published"], entry["desk"]
        click.echo(f"{entry['case']}")
        click.echo(f"  published: cells={published['cells']} dt={published['dt']} "
                   f"t_end={published['t_end']} mu={published['mu']} eta={published['eta']}")
        overrides = ", ".join(f"{k}={v}" for k, v in desk.items())
        click.echo(f"  desk:      {overrides}")
