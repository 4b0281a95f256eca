"""
Streamline snapshot of the in-plane velocity over the pressure field.
"""
import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from src.domain.entities.state import State  # noqa: E402
from src.domain.exceptions import ConfigurationError  # noqa: E402
from src.domain.services.diagnostics import Diagnostics  # noqa: E402

logger = logging.getLogger(__name__)


def plot_streamlines(diagnostics: Diagnostics, state: State, path, points_per_cell: int = 2,
                     density: float = 1.5) -> Path:
    """Pressure colour map with u streamlines in the (x, y) plane."""
    if diagnostics.complex.dim < 2:
        raise ConfigurationError("streamlines need a 2D or 3D case")
    x, y = diagnostics.sample_points(points_per_cell)[:2]
    z = diagnostics._transverse(2, None)
    points = [x, y, z]
    ux, uy, _ = (component[:, :, 0] for component in diagnostics.evaluate(state.u, points))
    pressure = diagnostics.pressure_field(state, points)[:, :, 0]

    fig, ax = plt.subplots(figsize=(6, 5))
    mesh = ax.pcolormesh(x, y, pressure.T, shading="auto", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="p")
    ax.streamplot(x, y, ux.T, uy.T, color="white", linewidth=0.6, density=density)
    ax.set_xlabel(r"$x$")
    ax.set_ylabel(r"$y$")
    ax.set_title(f"t = {state.time:.3f}")
    ax.set_aspect("equal")
    path = Path(path)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    logger.info("streamlines written", extra={"path": str(path), "time": state.time})
    return path
