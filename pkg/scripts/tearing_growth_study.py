"""
Full-resolution tearing study: runs CurrentSheet2D with the published
parameters (128 x 256 cells) and fits the growth rate of every excited mode.

Hours of wall clock; not part of the test suite.

    python scripts/tearing_growth_study.py --output-dir runs/tearing-published
"""
import logging
import sys
from pathlib import Path

import click

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from src.app import create_app  # noqa: E402
from src.application.use_cases.compute_spectrum import ComputeSpectrumRequest  # noqa: E402
from src.application.use_cases.run_simulation import RunSimulationRequest  # noqa: E402
from src.cli.schemas import build_run_config  # noqa: E402

logger = logging.getLogger("tearing_growth_study")


@click.command()
@click.option("--output-dir", default="runs/tearing-published", show_default=True)
@click.option("--eta", type=float, default=None, help="Override the resistivity.")
@click.option("--window", nargs=2, type=float, default=None, help="Fit window t0 t1.")
@click.option("--restart", type=click.Path(exists=True, dir_okay=False), default=None)
def main(output_dir, eta, window, restart):
    """Run the published tearing case and write growth_rates.csv."""
    app = create_app()
    data = {
        "case": "CurrentSheet2D",
        "preset": "published",
        "output": {"dir": output_dir, "snapshot_every": 50, "trace_every": 1},
    }
    if eta is not None:
        data["physics"] = {"eta": eta}
    if window:
        data["analysis"] = {"growth_window": list(window)}
    config = build_run_config(data, defaults=app.config)

    result = app.run_simulation().execute(RunSimulationRequest(config, restart))
    logger.info("run finished", extra={"steps": result.steps, "output_dir": str(result.output_dir)})

    response = app.compute_spectrum().execute(ComputeSpectrumRequest(result.output_dir, window or None))
    for mode, rate in sorted(response.summary["rates"].items()):
        click.echo(f"mode {mode:2d}  rate {rate: .5e}")


if __name__ == "__main__":
    main()
